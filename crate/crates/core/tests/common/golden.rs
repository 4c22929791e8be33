//! Frozen expected outputs under `data/toy/golden`. Running the tests with
//! `SORTACQ_BLESS=1` rewrites them from the current output.

use std::path::PathBuf;

pub fn path(name: &str) -> PathBuf {
    super::data_dir().join("golden").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(path(name)).unwrap_or_else(|e| panic!("golden {name}: {e}"))
}

pub fn check(name: &str, actual: &str) {
    let p = path(name);
    if std::env::var_os("SORTACQ_BLESS").is_some() {
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(&p, actual).unwrap();
        return;
    }
    let expected = read(name);
    if expected != actual {
        let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b);
        panic!("golden {name} differs (first differing line {line:?}):\n--- expected\n{expected}\n--- actual\n{actual}");
    }
}
