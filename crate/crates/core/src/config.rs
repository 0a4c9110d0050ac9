//! Flat JSON configuration records.
//!
//! Every key maps to one scalar. Energies are plain numbers (eV) or strings
//! with a unit suffix (`"1.5 eV"`, `"860 meV"`); temperature is a number or
//! `"300 K"`. Site energies can be given absolutely (`u_d`, `u_b`, `u_a`) or
//! relative to the acceptor (`u_d_minus_u_a`, `u_b_minus_u_d`).

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{PmetError, Result};
use crate::model::{
    CavityMode, CavityParams, DipoleSet, MolecularParams, SystemSpec, ThermalParams, TruncationMode,
    TruncationPolicy,
};

pub type ConfigRecord = Map<String, Value>;

const SYSTEM_KEYS: &[&str] = &[
    "mode",
    "u_d",
    "u_b",
    "u_a",
    "u_d_minus_u_a",
    "u_b_minus_u_d",
    "v_db",
    "v_ba",
    "lambda_da",
    "temperature",
    "hbar_omega_c",
    "chi",
    "hbar_g_c",
    "mu_da",
    "mu_dd",
    "mu_aa",
    "mu_db",
    "mu_ba",
    "d_db",
    "d_ba",
    "d_da",
    "n_max",
    "l_max",
    "m_max",
    "truncation",
    "tol",
];

/// Keys read by the sweep harness; `build_system` accepts and ignores them.
pub const SWEEP_KEYS: &[&str] = &["sweep_axis", "sweep_values", "sweep_grid", "pathway"];

const RESONANT_ONLY: &[&str] = &["mu_da", "mu_dd", "mu_aa"];
const OFFRES_ONLY: &[&str] = &["mu_db", "mu_ba", "d_db", "d_ba", "d_da", "l_max"];

/// Off-resonance permanent-dipole differences used when the record omits them.
pub const DEFAULT_D_DB: f64 = 5.0;
pub const DEFAULT_D_BA: f64 = 5.0;
pub const DEFAULT_D_DA: f64 = 1.0;

pub fn read_record(path: &Path) -> Result<ConfigRecord> {
    let text = std::fs::read_to_string(path)?;
    parse_record(&text)
}

pub fn parse_record(text: &str) -> Result<ConfigRecord> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(PmetError::config("<root>", "config must be a JSON object")),
        Err(e) => Err(PmetError::config("<root>", e.to_string())),
    }
}

fn split_unit(key: &str, s: &str) -> Result<(f64, String)> {
    let s = s.trim();
    // the unit is the trailing alphabetic run, so exponents like "1e-3" stay with the number
    let cut = s.rfind(|c: char| !c.is_ascii_alphabetic()).map_or(0, |i| i + 1);
    let (num, unit) = (s[..cut].trim(), s[cut..].trim());
    let value: f64 = num
        .parse()
        .map_err(|_| PmetError::config(key, format!("cannot parse number from `{s}`")))?;
    Ok((value, unit.to_string()))
}

/// Reads an energy in eV.
pub fn energy(key: &str, v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| PmetError::config(key, "not a finite number"))?,
        Value::String(s) => {
            let (x, unit) = split_unit(key, s)?;
            match unit.as_str() {
                "" | "eV" | "ev" => x,
                "meV" | "mev" => x * crate::units::MEV,
                other => return Err(PmetError::config(key, format!("unknown energy unit `{other}`"))),
            }
        }
        _ => return Err(PmetError::config(key, "expected a number or a string with unit")),
    };
    if !x.is_finite() {
        return Err(PmetError::config(key, "value must be finite"));
    }
    Ok(x)
}

fn temperature(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| PmetError::config(key, "not a finite number")),
        Value::String(s) => {
            let (x, unit) = split_unit(key, s)?;
            match unit.as_str() {
                "" | "K" => Ok(x),
                other => Err(PmetError::config(key, format!("unknown temperature unit `{other}`"))),
            }
        }
        _ => Err(PmetError::config(key, "expected a number")),
    }
}

fn number(key: &str, v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| PmetError::config(key, "expected a number"))
}

fn cutoff(key: &str, v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| PmetError::config(key, "expected a non-negative integer"))
}

struct Fields<'a> {
    rec: &'a ConfigRecord,
}

impl<'a> Fields<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.rec.get(key)
    }

    fn required(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| PmetError::config(key, "missing required field"))
    }

    fn energy(&self, key: &str) -> Result<f64> {
        energy(key, self.required(key)?)
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| number(key, v))
    }
}

/// Maps a construction error onto the config key that caused it.
fn keyed(e: PmetError) -> PmetError {
    match e {
        PmetError::InvalidParameter { name, message } => PmetError::Config { key: name, message },
        other => other,
    }
}

/// Validates a raw record into a [`SystemSpec`].
pub fn build_system(rec: &ConfigRecord) -> Result<SystemSpec<f64>> {
    let known: BTreeSet<&str> = SYSTEM_KEYS.iter().chain(SWEEP_KEYS).copied().collect();
    if let Some(k) = rec.keys().find(|k| !known.contains(k.as_str())) {
        return Err(PmetError::config(k.clone(), "unknown key"));
    }
    let f = Fields { rec };

    let mode: CavityMode = match f.required("mode")? {
        Value::String(s) => s.parse()?,
        _ => return Err(PmetError::config("mode", "expected a string")),
    };
    let foreign = match mode {
        CavityMode::Resonant => OFFRES_ONLY,
        CavityMode::OffResonant => RESONANT_ONLY,
    };
    if let Some(k) = foreign.iter().find(|k| rec.contains_key(**k)) {
        return Err(PmetError::config(*k, format!("not valid in {} mode", mode.as_str())));
    }

    let absolute = ["u_d", "u_b", "u_a"].iter().any(|k| rec.contains_key(*k));
    let relative = ["u_d_minus_u_a", "u_b_minus_u_d"].iter().any(|k| rec.contains_key(*k));
    let (u_d, u_b, u_a) = match (absolute, relative) {
        (true, true) => {
            return Err(PmetError::config(
                "u_d_minus_u_a",
                "give either absolute site energies or differences, not both",
            ))
        }
        (true, false) => (f.energy("u_d")?, f.energy("u_b")?, f.energy("u_a")?),
        _ => {
            let dda = f.energy("u_d_minus_u_a")?;
            let dbd = f.energy("u_b_minus_u_d")?;
            (dda, dda + dbd, 0.0)
        }
    };
    let molecular = MolecularParams::new(
        u_d,
        u_b,
        u_a,
        f.energy("v_db")?,
        f.energy("v_ba")?,
        f.energy("lambda_da")?,
    )
    .map_err(keyed)?;

    let dipoles = match mode {
        CavityMode::Resonant => DipoleSet::resonant(
            number("mu_da", f.required("mu_da")?)?,
            number("mu_dd", f.required("mu_dd")?)?,
            number("mu_aa", f.required("mu_aa")?)?,
        ),
        CavityMode::OffResonant => DipoleSet::off_resonant(
            number("mu_db", f.required("mu_db")?)?,
            number("mu_ba", f.required("mu_ba")?)?,
            f.number_or("d_db", DEFAULT_D_DB)?,
            f.number_or("d_ba", DEFAULT_D_BA)?,
            f.number_or("d_da", DEFAULT_D_DA)?,
        ),
    }
    .map_err(keyed)?;

    let hbar_omega_c = f.energy("hbar_omega_c")?;
    let cavity = match (f.get("chi"), f.get("hbar_g_c")) {
        (Some(_), Some(_)) => return Err(PmetError::config("hbar_g_c", "give either chi or hbar_g_c, not both")),
        (Some(v), None) => CavityParams::new(hbar_omega_c, energy("chi", v)?, &dipoles),
        (None, Some(v)) => CavityParams::from_coupling(hbar_omega_c, energy("hbar_g_c", v)?, &dipoles),
        (None, None) => return Err(PmetError::config("chi", "missing required field (or hbar_g_c)")),
    }
    .map_err(keyed)?;

    let thermal = ThermalParams::new(temperature("temperature", f.required("temperature")?)?).map_err(keyed)?;

    let start = TruncationPolicy::ADAPTIVE_START;
    let n_max = f.get("n_max").map_or(Ok(start), |v| cutoff("n_max", v))?;
    let m_max = f.get("m_max").map_or(Ok(start), |v| cutoff("m_max", v))?;
    let l_max = f.get("l_max").map_or(Ok(start), |v| cutoff("l_max", v))?;
    let tmode = match f.get("truncation") {
        None => TruncationMode::Adaptive { tol: f.number_or("tol", TruncationPolicy::DEFAULT_TOL)? },
        Some(Value::String(s)) if s == "adaptive" => {
            TruncationMode::Adaptive { tol: f.number_or("tol", TruncationPolicy::DEFAULT_TOL)? }
        }
        Some(Value::String(s)) if s == "fixed" => {
            if rec.contains_key("tol") {
                return Err(PmetError::config("tol", "tol only applies to adaptive truncation"));
            }
            TruncationMode::Fixed
        }
        Some(_) => return Err(PmetError::config("truncation", "expected \"fixed\" or \"adaptive\"")),
    };
    let truncation = TruncationPolicy::validated(n_max, l_max, m_max, tmode).map_err(keyed)?;

    SystemSpec::new(molecular, cavity, dipoles, thermal, truncation).map_err(keyed)
}

/// Serializes a spec into a record that [`build_system`] maps back to the same spec.
pub fn to_record(spec: &SystemSpec<f64>) -> ConfigRecord {
    let mut r = Map::new();
    let mut put = |k: &str, v: Value| {
        r.insert(k.to_string(), v);
    };
    let m = &spec.molecular;
    put("mode", spec.mode().as_str().into());
    put("u_d", m.u_d.into());
    put("u_b", m.u_b.into());
    put("u_a", m.u_a.into());
    put("v_db", m.v_db.into());
    put("v_ba", m.v_ba.into());
    put("lambda_da", m.lambda_da.into());
    put("temperature", spec.thermal.temperature.into());
    put("hbar_omega_c", spec.cavity.hbar_omega_c.into());
    put("chi", spec.cavity.chi.into());
    match spec.dipoles {
        DipoleSet::Resonant { mu_da, mu_dd, mu_aa } => {
            put("mu_da", mu_da.into());
            put("mu_dd", mu_dd.into());
            put("mu_aa", mu_aa.into());
        }
        DipoleSet::OffResonant { mu_db, mu_ba, d_db, d_ba, d_da } => {
            put("mu_db", mu_db.into());
            put("mu_ba", mu_ba.into());
            put("d_db", d_db.into());
            put("d_ba", d_ba.into());
            put("d_da", d_da.into());
            put("l_max", spec.truncation.l_max.into());
        }
    }
    let t = &spec.truncation;
    put("n_max", t.n_max.into());
    put("m_max", t.m_max.into());
    match t.mode {
        TruncationMode::Fixed => put("truncation", "fixed".into()),
        TruncationMode::Adaptive { tol } => {
            put("truncation", "adaptive".into());
            put("tol", tol.into());
        }
    }
    r
}

/// Bundled parameter sets.
pub mod bundled {
    pub const RESONANT_REFERENCE: &str = include_str!("../configs/resonant.json");
    pub const OFFRES_REFERENCE: &str = include_str!("../configs/offres.json");
    pub const SWEEP_RESONANT_860: &str = include_str!("../configs/sweep_resonant_860.json");
    pub const SWEEP_RESONANT_430: &str = include_str!("../configs/sweep_resonant_430.json");
    pub const SWEEP_OFFRES_200: &str = include_str!("../configs/sweep_offres_200.json");
    pub const SWEEP_OFFRES_40: &str = include_str!("../configs/sweep_offres_40.json");
    pub const SWEEP_BRIDGE_GAP_200: &str = include_str!("../configs/sweep_bridge_gap_200.json");
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(v: Value) -> ConfigRecord {
        v.as_object().unwrap().clone()
    }

    fn resonant() -> ConfigRecord {
        rec(json!({
            "mode": "resonant",
            "lambda_da": "0.65 eV",
            "u_d_minus_u_a": "0 eV",
            "u_b_minus_u_d": "1.5 eV",
            "v_db": "0.02 eV",
            "v_ba": "20 meV",
            "temperature": 300,
            "hbar_omega_c": "860 meV",
            "chi": 0.0,
            "mu_da": 1, "mu_dd": 5, "mu_aa": -5
        }))
    }

    #[test]
    fn reference_resonant_set_is_valid() {
        let s = build_system(&resonant()).unwrap();
        assert_eq!(s.mode(), CavityMode::Resonant);
        assert_eq!(s.molecular.gap_db(), 1.5);
        assert_eq!(s.molecular.v_ba, 0.02);
        assert!((s.cavity.hbar_omega_c - 0.86).abs() < 1e-15);
    }

    #[test]
    fn reference_offres_set_is_valid() {
        let s = build_system(&parse_record(bundled::OFFRES_REFERENCE).unwrap()).unwrap();
        assert_eq!(s.mode(), CavityMode::OffResonant);
        assert!((s.molecular.v_db - 0.005).abs() < 1e-15);
        assert!((s.molecular.u_d_minus_u_a() - 0.15).abs() < 1e-15);
        match s.dipoles {
            DipoleSet::OffResonant { d_db, d_ba, d_da, .. } => assert_eq!((d_db, d_ba, d_da), (5.0, 5.0, 1.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_lambda_is_reported_by_key() {
        let mut r = resonant();
        r.insert("lambda_da".into(), json!(0.0));
        match build_system(&r).unwrap_err() {
            PmetError::Config { key, message } => {
                assert_eq!(key, "lambda_da");
                assert_eq!(message, "lambda_da must be positive");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let cases: Vec<(&str, Value)> = vec![
            ("hbar_omega_c", json!("-1 eV")),
            ("chi", json!(-0.1)),
            ("temperature", json!(0)),
            ("v_db", json!("3 furlongs")),
        ];
        for (k, v) in cases {
            let mut r = resonant();
            r.insert(k.into(), v);
            match build_system(&r).unwrap_err() {
                PmetError::Config { key, .. } => assert_eq!(key, k),
                e => panic!("{k}: unexpected {e}"),
            }
        }
        let mut r = resonant();
        r.remove("v_ba");
        assert!(matches!(build_system(&r), Err(PmetError::Config { key, .. }) if key == "v_ba"));
    }

    #[test]
    fn mode_dipole_mismatch() {
        let mut r = resonant();
        r.insert("mu_db".into(), json!(1));
        assert!(matches!(build_system(&r), Err(PmetError::Config { key, .. }) if key == "mu_db"));
    }

    #[test]
    fn unknown_key_rejected() {
        let mut r = resonant();
        r.insert("v_da".into(), json!(0.01));
        assert!(matches!(build_system(&r), Err(PmetError::Config { key, .. }) if key == "v_da"));
    }

    #[test]
    fn units_parse() {
        assert_eq!(energy("x", &json!("1.5 eV")).unwrap(), 1.5);
        assert!((energy("x", &json!("860 meV")).unwrap() - 0.86).abs() < 1e-15);
        assert!((energy("x", &json!("5meV")).unwrap() - 0.005).abs() < 1e-15);
        assert!((energy("x", &json!("1e-3 eV")).unwrap() - 1e-3).abs() < 1e-18);
        assert_eq!(energy("x", &json!(0.25)).unwrap(), 0.25);
        assert!(energy("x", &json!("1 J")).is_err());
        assert!(energy("x", &json!(true)).is_err());
    }

    #[test]
    fn hbar_g_c_back_derives_chi() {
        let mut r = resonant();
        r.remove("chi");
        r.insert("hbar_g_c".into(), json!("43 meV"));
        let s = build_system(&r).unwrap();
        assert!((s.cavity.chi - 0.043).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_identity() {
        for text in [bundled::RESONANT_REFERENCE, bundled::OFFRES_REFERENCE] {
            let s = build_system(&parse_record(text).unwrap()).unwrap();
            let back = build_system(&to_record(&s)).unwrap();
            assert_eq!(s, back);
            // and through text
            let text = serde_json::to_string(&to_record(&s)).unwrap();
            assert_eq!(build_system(&parse_record(&text).unwrap()).unwrap(), s);
        }
    }
}
