//! Sixteen-step thermal color ramps, one for light and one for dark
//! backgrounds.
//!
//! Palette files hold 32 lines of `#RRGGBB`: the light block (bucket 0 to
//! 15) followed by the dark block. Blank lines are ignored.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::buckets::{BucketIndex, BUCKET_COUNT};

pub const DEFAULT_PALETTE: &str = include_str!("../../assets/thermal.palette");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaletteError {
    #[error("palette needs {expected} colors, found {found}")]
    Count { expected: usize, found: usize },
    #[error("line {line}: {value:?} is not a #RRGGBB color")]
    Color { line: usize, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Light,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    /// Black or white, whichever reads better on this background.
    pub fn text_color(self) -> Rgb {
        let lum = 0.2126 * f64::from(self.0) + 0.7152 * f64::from(self.1) + 0.0722 * f64::from(self.2);
        if lum > 140.0 {
            Rgb(0, 0, 0)
        } else {
            Rgb(255, 255, 255)
        }
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl FromStr for Rgb {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        let hex = s.strip_prefix('#').ok_or(())?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(());
        }
        let c = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| ());
        Ok(Rgb(c(0)?, c(2)?, c(4)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    light: [Rgb; BUCKET_COUNT],
    dark: [Rgb; BUCKET_COUNT],
}

impl Default for Palette {
    fn default() -> Self {
        Palette::parse(DEFAULT_PALETTE).expect("bundled palette is valid")
    }
}

impl Palette {
    pub fn parse(input: &str) -> Result<Self, PaletteError> {
        let mut colors = Vec::with_capacity(2 * BUCKET_COUNT);
        for (i, line) in input.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let c = line.parse().map_err(|_| PaletteError::Color { line: i + 1, value: line.to_owned() })?;
            colors.push(c);
        }
        if colors.len() != 2 * BUCKET_COUNT {
            return Err(PaletteError::Count { expected: 2 * BUCKET_COUNT, found: colors.len() });
        }
        Ok(Palette {
            light: colors[..BUCKET_COUNT].try_into().expect("16"),
            dark: colors[BUCKET_COUNT..].try_into().expect("16"),
        })
    }

    pub fn color(&self, bucket: BucketIndex, mode: Mode) -> Rgb {
        match mode {
            Mode::Light => self.light[bucket.get()],
            Mode::Dark => self.dark[bucket.get()],
        }
    }

    pub fn colors(&self, mode: Mode) -> &[Rgb; BUCKET_COUNT] {
        match mode {
            Mode::Light => &self.light,
            Mode::Dark => &self.dark,
        }
    }

    pub fn to_file_string(&self) -> String {
        self.light.iter().chain(&self.dark).map(|c| format!("{c}\n")).collect()
    }
}
