//! Synthetic speed-sign scenes with ground truth, and the corpus manifest.

mod corpus;
mod font;
mod render;

pub use corpus::{
    generate_corpus, manifest_to_string, plan_corpus, read_manifest, resolve_image_path, write_manifest, Corpus,
    CorpusParams, ScenePlan, MANIFEST_NAME,
};
pub use font::{digit_glyph, ink_columns, scaled_glyph, FONT_COLS, FONT_ROWS};
pub use render::{
    default_rim_color, render_scene, Annotation, Background, DigitAnnotation, SignAnnotation, SignSpec,
    DIGIT_GAP_CELLS, DIGIT_HEIGHT_FRACTION, MAX_ROTATION, RIM_FRACTION, SPEEDS,
};
