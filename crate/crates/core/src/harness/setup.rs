//! Simulation setups: node layout, RIS hardware and link budget.

use crate::channel::{ClusterConfig, Orientation, Position3D, RadiationPattern, Ris, RisGeometry, Scene};
use crate::error::{domain, Error, Result};
use crate::learning::Problem;
use crate::ris::{Codebook, GroupMap, LinkBudget};

pub const TX_POSITION: Position3D = Position3D { x: 0.0, y: 30.0, z: 2.0 };
pub const RX_HEIGHT: f64 = 1.0;
pub const RIS_HEIGHT: f64 = 2.0;
pub const WALL_LOSS_DB: f64 = 10.0;

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Which setup a spec was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetupId {
    Preset(u8),
    Custom,
}

impl std::fmt::Display for SetupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetupId::Preset(id) => write!(f, "{id}"),
            SetupId::Custom => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for SetupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "custom" => Ok(SetupId::Custom),
            "1" => Ok(SetupId::Preset(1)),
            "2" => Ok(SetupId::Preset(2)),
            "3" => Ok(SetupId::Preset(3)),
            other => Err(Error::Config(format!("unknown setup `{other}` (expected 1, 2, 3 or custom)"))),
        }
    }
}

/// A four-RIS layout. RIS1 and RIS2 sit 5 m before the RX at y = 25 and 35;
/// RIS3 and RIS4 are placed freely.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupSpec {
    pub id: SetupId,
    /// TX-RX distance; the RX sits at (d_h, 30, 1).
    pub d_h: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub wall: bool,
    pub wall_loss_db: f64,
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub spacing_wavelengths: f64,
    pub groups: usize,
    pub phase_bits: u32,
    pub tx_power: f64,
    pub noise_dbm: f64,
    pub carrier_frequency: f64,
    pub pathloss_exponent: f64,
    pub pattern: RadiationPattern,
}

impl SetupSpec {
    pub fn preset(id: u8) -> Result<Self> {
        let base = Self {
            id: SetupId::Preset(id),
            d_h: 20.0,
            x1: 25.0,
            y1: 25.0,
            x2: 25.0,
            y2: 35.0,
            wall: false,
            wall_loss_db: WALL_LOSS_DB,
            ris_rows: 8,
            ris_cols: 8,
            spacing_wavelengths: 0.5,
            groups: 4,
            phase_bits: 1,
            tx_power: 1.0,
            noise_dbm: -100.0,
            carrier_frequency: 3.5e9,
            pathloss_exponent: 2.0,
            pattern: RadiationPattern::Isotropic,
        };
        match id {
            1 => Ok(base),
            2 | 3 => Ok(Self { d_h: 10.0, x1: 5.0, y1: 27.5, x2: 5.0, y2: 32.5, wall: id == 3, ..base }),
            _ => Err(domain(format!("unknown setup {id}"))),
        }
    }

    pub fn rx(&self) -> Position3D {
        Position3D::new(self.d_h, TX_POSITION.y, RX_HEIGHT)
    }

    pub fn ris_positions(&self) -> [Position3D; 4] {
        [
            Position3D::new(self.d_h - 5.0, 25.0, RIS_HEIGHT),
            Position3D::new(self.d_h - 5.0, 35.0, RIS_HEIGHT),
            Position3D::new(self.x1, self.y1, RIS_HEIGHT),
            Position3D::new(self.x2, self.y2, RIS_HEIGHT),
        ]
    }

    pub fn penetration_loss_db(&self) -> f64 {
        if self.wall {
            self.wall_loss_db
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.d_h, self.x1, self.y1, self.x2, self.y2, self.wall_loss_db, self.spacing_wavelengths];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(domain("setup coordinates must be finite"));
        }
        if self.d_h <= 0.0 {
            return Err(domain("d_h must be positive"));
        }
        if self.wall_loss_db < 0.0 {
            return Err(domain("wall loss must be non-negative"));
        }
        if self.groups == 0 || self.groups > self.ris_rows * self.ris_cols {
            return Err(domain(format!("cannot split {} elements into {} groups", self.ris_rows * self.ris_cols, self.groups)));
        }
        Ok(())
    }

    /// Scene with every RIS upright and facing the TX-RX line.
    pub fn scene(&self) -> Result<Scene> {
        self.validate()?;
        let (tx, rx) = (TX_POSITION, self.rx());
        let ris = self
            .ris_positions()
            .into_iter()
            .map(|position| {
                let orientation = Orientation::vertical_facing(facing_direction(position, tx, rx))?;
                let geometry = RisGeometry::new(self.ris_rows, self.ris_cols, self.spacing_wavelengths, orientation)?;
                Ok(Ris { position, geometry })
            })
            .collect::<Result<Vec<_>>>()?;
        let scene = Scene {
            tx,
            rx,
            ris,
            carrier_frequency: self.carrier_frequency,
            pathloss_exponent: self.pathloss_exponent,
            pattern: self.pattern,
            direct_penetration_loss_db: self.penetration_loss_db(),
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn group_maps(&self) -> Result<Vec<GroupMap>> {
        Ok(vec![GroupMap::tiles(self.ris_rows, self.ris_cols, self.groups)?; 4])
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Codebook::new(self.phase_bits)
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(self.tx_power, dbm_to_watts(self.noise_dbm))
    }

    pub fn problem(&self, clusters: ClusterConfig) -> Result<Problem> {
        Problem::new(self.scene()?, clusters, self.group_maps()?, self.codebook()?, self.link_budget()?)
    }
}

/// Horizontal direction from a RIS toward the closest point of the TX-RX
/// line, or toward the RX when the RIS lies on that line.
fn facing_direction(ris: Position3D, tx: Position3D, rx: Position3D) -> Position3D {
    let flat = |p: Position3D| Position3D::new(p.x, p.y, 0.0);
    let (a, b, p) = (flat(tx), flat(rx), flat(ris));
    let line = b - a;
    let t = (p - a).dot(line) / line.dot(line);
    let foot = a + line * t;
    let dir = foot - p;
    if dir.norm() > 1e-9 * line.norm() {
        dir
    } else {
        b - p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Position3D, b: Position3D) -> bool {
        a.distance(b) < 1e-12
    }

    #[test]
    fn preset_layouts() {
        let s1 = SetupSpec::preset(1).unwrap().scene().unwrap();
        assert!(close(s1.ris[0].position, Position3D::new(15.0, 25.0, 2.0)));
        assert!(close(s1.ris[1].position, Position3D::new(15.0, 35.0, 2.0)));
        assert!(close(s1.ris[3].position, Position3D::new(25.0, 35.0, 2.0)));
        assert!(close(s1.rx, Position3D::new(20.0, 30.0, 1.0)));
        assert_eq!(s1.direct_penetration_loss_db, 0.0);

        let s2 = SetupSpec::preset(2).unwrap();
        assert!(!s2.wall);
        assert!(close(s2.scene().unwrap().ris[2].position, Position3D::new(5.0, 27.5, 2.0)));

        let s3 = SetupSpec::preset(3).unwrap().scene().unwrap();
        assert_eq!(s3.direct_penetration_loss_db, 10.0);
        assert!(SetupSpec::preset(4).is_err());
    }

    #[test]
    fn table_constants() {
        let s = SetupSpec::preset(1).unwrap();
        let problem = s.problem(ClusterConfig::default()).unwrap();
        assert_eq!(problem.num_ris(), 4);
        assert_eq!(problem.elements(), 64);
        assert_eq!(problem.groups(), 4);
        assert_eq!(problem.codebook.len(), 2);
        assert_eq!(problem.budget.power, 1.0);
        assert!((problem.budget.noise - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn every_ris_faces_both_ends() {
        for id in 1..=3 {
            let scene = SetupSpec::preset(id).unwrap().scene().unwrap();
            for ris in &scene.ris {
                let o = ris.geometry.orientation;
                assert!((ris.position - scene.tx).dot(o.normal()) < 0.0);
                assert!((ris.position - scene.rx).dot(o.normal()) < 0.0);
                assert_eq!(o.vertical(), Position3D::new(0.0, 0.0, 1.0));
            }
        }
    }

    #[test]
    fn ris_on_the_line_faces_rx() {
        let d = facing_direction(Position3D::new(5.0, 30.0, 2.0), TX_POSITION, Position3D::new(20.0, 30.0, 1.0));
        assert!(d.x > 0.0 && d.y == 0.0);
    }

    #[test]
    fn setup_ids_parse() {
        assert_eq!("custom".parse::<SetupId>().unwrap(), SetupId::Custom);
        assert_eq!("3".parse::<SetupId>().unwrap(), SetupId::Preset(3));
        assert!("0".parse::<SetupId>().is_err());
    }
}
