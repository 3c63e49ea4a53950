use std::fs;
use std::io::{Read, Write};
use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use tar::{EntryType, Header};
use walkdir::WalkDir;

use super::bundle::is_bundle_content;
use super::{PackageError, RunBundle};

/// Packs a bundle into a reproducible `.tar.gz`: entries sorted by path,
/// mtime 0, uid/gid 0, no user names, modes normalized to 0755/0644, gzip
/// header without timestamp.
pub fn archive_bundle(bundle: &RunBundle) -> Result<Vec<u8>, PackageError> {
    let root = &bundle.dir;
    let mut entries = Vec::new();
    for entry in WalkDir::new(root).min_depth(1) {
        let entry = entry.map_err(|e| PackageError::Io { path: root.to_path_buf(), source: e.into() })?;
        let rel = entry.path().strip_prefix(root).expect("walk stays under root").to_path_buf();
        if is_bundle_content(&rel) && (entry.file_type().is_dir() || entry.file_type().is_file()) {
            entries.push((rel, entry.file_type().is_dir(), entry.path().to_path_buf()));
        }
    }
    // Paths as strings so ordering is platform independent.
    entries.sort_by(|a, b| a.0.to_string_lossy().cmp(&b.0.to_string_lossy()));

    let mut tar = tar::Builder::new(Vec::new());
    for (rel, is_dir, abs) in entries {
        let mut header = Header::new_gnu();
        header.set_mtime(0);
        header.set_uid(0);
        header.set_gid(0);
        header.set_username("").map_err(PackageError::io(&abs))?;
        header.set_groupname("").map_err(PackageError::io(&abs))?;
        if is_dir {
            header.set_entry_type(EntryType::Directory);
            header.set_mode(0o755);
            header.set_size(0);
            tar.append_data(&mut header, &rel, std::io::empty()).map_err(PackageError::io(&abs))?;
        } else {
            let data = fs::read(&abs).map_err(PackageError::io(&abs))?;
            let mode = fs::metadata(&abs).map_err(PackageError::io(&abs))?.permissions().mode();
            header.set_entry_type(EntryType::Regular);
            header.set_mode(if mode & 0o111 != 0 { 0o755 } else { 0o644 });
            header.set_size(data.len() as u64);
            tar.append_data(&mut header, &rel, data.as_slice()).map_err(PackageError::io(&abs))?;
        }
    }
    let tar_bytes = tar.into_inner().map_err(PackageError::io(root))?;

    let mut gz = GzBuilder::new().mtime(0).operating_system(255).write(Vec::new(), Compression::default());
    gz.write_all(&tar_bytes).map_err(PackageError::io(root))?;
    gz.finish().map_err(PackageError::io(root))
}

/// Unpacks an archive produced by [`archive_bundle`] into `dest`, keeping
/// file modes.
pub fn extract_archive(bytes: &[u8], dest: &Path) -> Result<RunBundle, PackageError> {
    let mut decoded = Vec::new();
    GzDecoder::new(bytes).read_to_end(&mut decoded).map_err(PackageError::io(dest))?;
    let mut archive = tar::Archive::new(decoded.as_slice());
    archive.set_preserve_permissions(true);
    archive.set_preserve_mtime(false);
    fs::create_dir_all(dest).map_err(PackageError::io(dest))?;
    archive.unpack(dest).map_err(PackageError::io(dest))?;
    RunBundle::open(dest)
}
