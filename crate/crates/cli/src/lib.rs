//! Command-line front end: workspace files, command dispatch and reports.

// Diagnostics are returned by value on the cold path.
#![allow(clippy::result_large_err)]

pub mod commands;
pub mod report;
pub mod workspace;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use toposforge::holonomy::DEFAULT_CLOSURE_CAP;

use commands::Outcome;
use report::Report;
use workspace::{parse_workspace, Diagnostic};

pub const CLOSURE_CAP_VAR: &str = "TOPOSFORGE_CLOSURE_CAP";

#[derive(Parser, Debug)]
#[command(name = "toposforge", version, about = "Check sites, sheaves, holonomy and geometric structures on finite categories")]
pub struct Cli {
    /// Workspace JSON file.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub workspace: Option<PathBuf>,
    /// Emit a machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load and validate every entity.
    Check,
    /// Print the canonical serialization.
    Fmt(FmtArgs),
    /// Connected components of a covering family's nerve.
    Components {
        #[arg(long)]
        family: String,
    },
    /// Sheaf condition, constancy and local constancy.
    SheafCheck {
        #[arg(long)]
        sheaf: String,
        #[arg(long)]
        topology: String,
    },
    /// Holonomy group of a locally constant sheaf.
    Holonomy {
        #[arg(long)]
        sheaf: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        base: String,
        /// Compare against the holonomy over another family.
        #[arg(long)]
        compare: Option<String>,
    },
    /// Finite stage of the pro-fundamental group.
    Pi1 {
        #[arg(long)]
        family: String,
        #[arg(long = "sheaf", required = true)]
        sheaves: Vec<String>,
    },
    /// Exhaustive simple-connectedness up to a fiber bound.
    SimplyConnected {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Atlas laws, transitions and structure holonomy.
    CgCheck {
        #[arg(long)]
        atlas: String,
        #[arg(long)]
        base: Option<String>,
        /// Check this functor as a morphism into `--target`.
        #[arg(long, requires = "target")]
        morphism: Option<String>,
        #[arg(long, requires = "morphism")]
        target: Option<String>,
    },
    /// Germ space components and the developing labelling.
    Develop {
        #[arg(long)]
        atlas: String,
        /// `<object>:<element>` to explore from.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Structural bundle round trip and section checks.
    Bundle {
        #[arg(long)]
        atlas: String,
        #[arg(long)]
        section: Option<String>,
    },
    /// Representations of the holonomy image and their flat bundles.
    Deform {
        #[arg(long)]
        atlas: String,
        #[arg(long)]
        base: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct FmtArgs {
    /// Exit 1 when the file is not already canonical.
    #[arg(long, conflicts_with = "write")]
    pub check: bool,
    /// Rewrite the file in place.
    #[arg(long)]
    pub write: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Fmt(_) => "fmt",
            Command::Components { .. } => "components",
            Command::SheafCheck { .. } => "sheaf-check",
            Command::Holonomy { .. } => "holonomy",
            Command::Pi1 { .. } => "pi1",
            Command::SimplyConnected { .. } => "simply-connected",
            Command::CgCheck { .. } => "cg-check",
            Command::Develop { .. } => "develop",
            Command::Bundle { .. } => "bundle",
            Command::Deform { .. } => "deform",
        }
    }
}

/// The closure cap from the environment, or the default.
pub fn closure_cap() -> Result<usize, Diagnostic> {
    match std::env::var(CLOSURE_CAP_VAR) {
        Err(_) => Ok(DEFAULT_CLOSURE_CAP),
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| Diagnostic {
            code: "USAGE".into(),
            entity: Some(CLOSURE_CAP_VAR.into()),
            pointer: String::new(),
            message: format!("expected a positive integer, got `{v}`"),
            line: None,
            column: None,
        }),
    }
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> Diagnostic {
    Diagnostic {
        code: "IO".into(),
        entity: Some(path.display().to_string()),
        pointer: String::new(),
        message: e.to_string(),
        line: None,
        column: None,
    }
}

fn dispatch(cli: &Cli, text: &str, path: &std::path::Path) -> Result<Outcome, Diagnostic> {
    let cap = closure_cap()?;
    let ws = parse_workspace(text, cap)?;
    Ok(match &cli.command {
        Command::Check => commands::check(&ws),
        Command::Fmt(a) => {
            let out = commands::fmt(&ws, text);
            if a.write && !out.holds {
                std::fs::write(path, &out.lines[0]).map_err(|e| io_error(path, e))?;
                return Ok(Outcome {
                    holds: true,
                    lines: vec![format!("rewrote {}", path.display())],
                    result: json!({ "canonical": true, "rewritten": true }),
                    witnesses: Vec::new(),
                });
            }
            if a.check || a.write {
                let line = if out.holds { "canonical" } else { "not canonical" };
                Outcome { lines: vec![line.into()], ..out }
            } else {
                // Printing the canonical text always succeeds.
                Outcome {
                    holds: true,
                    witnesses: Vec::new(),
                    ..out
                }
            }
        }
        Command::Components { family } => commands::components_cmd(&ws, family)?,
        Command::SheafCheck { sheaf, topology } => commands::sheaf_check(&ws, sheaf, topology)?,
        Command::Holonomy {
            sheaf,
            family,
            base,
            compare,
        } => commands::holonomy(&ws, sheaf, family, base, compare.as_deref(), cap)?,
        Command::Pi1 { family, sheaves } => commands::pi1(&ws, family, sheaves, cap)?,
        Command::SimplyConnected { family, k } => commands::simply_connected(&ws, family, *k, cap)?,
        Command::CgCheck {
            atlas,
            base,
            morphism,
            target,
        } => {
            let m = morphism.as_deref().zip(target.as_deref());
            commands::cg_check(&ws, atlas, base.as_deref(), m)?
        }
        Command::Develop { atlas, basepoint } => commands::develop(&ws, atlas, basepoint.as_deref())?,
        Command::Bundle { atlas, section } => commands::bundle(&ws, atlas, section.as_deref())?,
        Command::Deform { atlas, base } => commands::deform(&ws, atlas, base.as_deref())?,
    })
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code: 0 holds, 1 fails with a witness, 2 unusable input.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let command = cli.command.name();
    let args_json = args_value(&cli.command);
    let Some(path) = cli.workspace.clone() else {
        let d = Diagnostic {
            code: "USAGE".into(),
            entity: None,
            pointer: String::new(),
            message: "a workspace file is required (--workspace FILE)".into(),
            line: None,
            column: None,
        };
        return finish(&cli, Report::error(command, None, None, args_json, d), out, err);
    };
    let text = match std::fs::read(&path) {
        Ok(bytes) => bytes,
        Err(e) => {
            let d = io_error(&path, e);
            return finish(&cli, Report::error(command, Some(&path), None, args_json, d), out, err);
        }
    };
    let hash = report::sha256_hex(&text);
    let text = match String::from_utf8(text) {
        Ok(t) => t,
        Err(_) => {
            let d = Diagnostic {
                code: "SYNTAX".into(),
                entity: Some(path.display().to_string()),
                pointer: String::new(),
                message: "workspace is not UTF-8".into(),
                line: None,
                column: None,
            };
            return finish(&cli, Report::error(command, Some(&path), Some(hash), args_json, d), out, err);
        }
    };
    let report = match dispatch(&cli, &text, &path) {
        Ok(o) => Report::outcome(command, &path, hash, args_json, o),
        Err(d) => Report::error(command, Some(&path), Some(hash), args_json, d),
    };
    finish(&cli, report, out, err)
}

fn finish(cli: &Cli, report: Report, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let code = report.exit_code;
    if cli.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        if let Some(d) = &report.error {
            let _ = writeln!(err, "{d}");
        }
        for l in &report.lines {
            // Canonical text already ends in a newline.
            if l.ends_with('\n') {
                let _ = write!(out, "{l}");
            } else {
                let _ = writeln!(out, "{l}");
            }
        }
    }
    code
}

fn args_value(c: &Command) -> Value {
    match c {
        Command::Check => json!({}),
        Command::Fmt(a) => json!({ "check": a.check, "write": a.write }),
        Command::Components { family } => json!({ "family": family }),
        Command::SheafCheck { sheaf, topology } => json!({ "sheaf": sheaf, "topology": topology }),
        Command::Holonomy {
            sheaf,
            family,
            base,
            compare,
        } => json!({ "sheaf": sheaf, "family": family, "base": base, "compare": compare }),
        Command::Pi1 { family, sheaves } => json!({ "family": family, "sheaves": sheaves }),
        Command::SimplyConnected { family, k } => json!({ "family": family, "k": k }),
        Command::CgCheck {
            atlas,
            base,
            morphism,
            target,
        } => json!({ "atlas": atlas, "base": base, "morphism": morphism, "target": target }),
        Command::Develop { atlas, basepoint } => json!({ "atlas": atlas, "basepoint": basepoint }),
        Command::Bundle { atlas, section } => json!({ "atlas": atlas, "section": section }),
        Command::Deform { atlas, base } => json!({ "atlas": atlas, "base": base }),
    }
}
