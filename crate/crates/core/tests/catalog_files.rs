//! The shipped `catalog/*.manifold` documents match the built-in entries.
//! Set `SEMISYM_REGENERATE_CATALOG=1` to rewrite them.

use std::fs;
use std::path::PathBuf;

use semisym::catalog;
use semisym::geometry::load_spec_file;

fn catalog_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../catalog")
}

#[test]
fn shipped_documents_match_builtins() {
    let dir = catalog_dir();
    let regenerate = std::env::var_os("SEMISYM_REGENERATE_CATALOG").is_some();
    for entry in catalog::all() {
        let path = dir.join(format!("{}.manifold", entry.name));
        let doc = entry.to_document();
        if regenerate {
            fs::write(&path, &doc).unwrap();
        }
        let on_disk = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, doc, "{} differs from the built-in", path.display());
        let spec = load_spec_file(&path).unwrap();
        assert_eq!(spec, entry.spec, "{}", entry.name);
    }
}

#[test]
fn no_stray_documents() {
    let mut names: Vec<String> = fs::read_dir(catalog_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "manifold").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    let mut expected: Vec<String> = catalog::NAMES.iter().map(|s| s.to_string()).collect();
    expected.sort();
    assert_eq!(names, expected);
}
