# ParaView pipeline for: Heatmap of HPC Performance Counters
import os
from paraview.simple import *

source = '/data/input.vtu' if os.path.exists('/data/input.vtu') else os.path.join(os.path.dirname(__file__), 'sample.csv')
reader = OpenDataFile(source)
Show(reader)
Render()
SaveScreenshot('output.png')
