//! JSON helpers and resolution of space and surrogate arguments.

use std::fs;
use std::path::Path;

use annotune_core::space::BUILTIN_SPACES;
use annotune_core::{builtin_space, ParamSpace, Surrogate, SurrogateProfile, SurrogateSpec};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// Bundled space definitions, identical to [`builtin_space`].
pub const BUNDLED_SPACE_FILES: [(&str, &str); 3] = [
    ("convolution", include_str!("../data/spaces/convolution.json")),
    ("raycasting", include_str!("../data/spaces/raycasting.json")),
    ("stereo", include_str!("../data/spaces/stereo.json")),
];

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

/// A built-in space name or the path of a space JSON file.
pub fn load_space(arg: &str) -> Result<ParamSpace> {
    if BUILTIN_SPACES.contains(&arg) {
        return Ok(builtin_space(arg)?);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Usage(format!(
            "`{arg}` is neither a built-in space ({}) nor an existing file",
            BUILTIN_SPACES.join(", ")
        )));
    }
    read_json(path)
}

/// A bundled surrogate profile name or the path of a surrogate spec file.
pub fn load_surrogate(arg: &str, space: &ParamSpace) -> Result<Surrogate> {
    if let Some(profile) = SurrogateProfile::from_name(arg) {
        return Ok(profile.surrogate(space)?);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Usage(format!(
            "`{arg}` is neither a bundled surrogate (cpu-like, gpu-a, gpu-b) nor an existing file"
        )));
    }
    let spec: SurrogateSpec = read_json(path)?;
    let stem = path.file_stem().map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Surrogate::new(spec, space)?.with_id(format!("surrogate:{stem}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_space_files_match_builtins() {
        for (name, text) in BUNDLED_SPACE_FILES {
            let parsed: ParamSpace = serde_json::from_str(text).unwrap();
            assert_eq!(parsed, builtin_space(name).unwrap());
            assert_eq!(to_json_string(&builtin_space(name).unwrap()), text);
        }
    }

    #[test]
    fn bundled_surrogate_files_match_profiles() {
        let files = [
            ("cpu-like", include_str!("../data/surrogates/cpu-like-convolution.json")),
            ("gpu-a", include_str!("../data/surrogates/gpu-a-convolution.json")),
            ("gpu-b", include_str!("../data/surrogates/gpu-b-convolution.json")),
        ];
        let space = builtin_space("convolution").unwrap();
        for (name, text) in files {
            let spec: SurrogateSpec = serde_json::from_str(text).unwrap();
            assert_eq!(spec, SurrogateProfile::from_name(name).unwrap().spec_for(&space));
        }
    }

    #[test]
    fn unknown_arguments_are_usage_errors() {
        assert!(matches!(load_space("no-such-space"), Err(Error::Usage(_))));
        let space = builtin_space("convolution").unwrap();
        assert!(matches!(load_surrogate("no-such-profile", &space), Err(Error::Usage(_))));
    }
}
