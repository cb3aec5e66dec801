//! Regenerates the shipped per-emotion data files under `assets/templates/`
//! from the procedural builders in `toykit::synth`.
//!
//! Run from anywhere in the workspace:
//!
//! ```bash
//! cargo run -p toykit --example generate_templates
//! ```
//!
//! A unit test compares the shipped bytes against the builders, so editing
//! the builders without re-running this will fail `cargo test`.

use std::fs;
use std::path::PathBuf;
use toykit::synth::{render_face_template_file, render_voice_profile_file};
use toykit::EmotionLabel;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets/templates");
    fs::create_dir_all(&dir)?;
    for label in EmotionLabel::ALL {
        let face = dir.join(format!("face_{label}.tpl"));
        fs::write(&face, render_face_template_file(label))?;
        println!("wrote {}", face.display());
        let voice = dir.join(format!("voice_{label}.tpl"));
        fs::write(&voice, render_voice_profile_file(label))?;
        println!("wrote {}", voice.display());
    }
    Ok(())
}
