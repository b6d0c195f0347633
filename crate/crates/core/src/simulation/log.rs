//! Time-indexed record of a closed-loop run and its CSV form.

use std::io::{self, Write};

use crate::geometry::Pose;
use crate::JointVector;

pub const CSV_COLUMNS: [&str; 21] = [
    "t_s",
    "x_ref_m",
    "z_ref_m",
    "theta_ref_deg",
    "psi_ref_deg",
    "q13_ref_m",
    "q23_ref_m",
    "q33_ref_m",
    "q42_ref_m",
    "q13_m",
    "q23_m",
    "q33_m",
    "q42_m",
    "u13",
    "u23",
    "u33",
    "u42",
    "e13_m",
    "e23_m",
    "e33_m",
    "e42_m",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimLog {
    pub dt: f64,
    pub time: Vec<f64>,
    pub pose_ref: Vec<Pose>,
    pub q_ref: Vec<JointVector>,
    pub q: Vec<JointVector>,
    pub u: Vec<JointVector>,
    pub e: Vec<JointVector>,
    /// Key/value pairs echoed as `#` comment lines ahead of the CSV header.
    pub metadata: Vec<(String, String)>,
}

impl SimLog {
    pub fn with_capacity(dt: f64, n: usize) -> Self {
        Self {
            dt,
            time: Vec::with_capacity(n),
            pose_ref: Vec::with_capacity(n),
            q_ref: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            metadata: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn push(&mut self, t: f64, pose_ref: Pose, q_ref: JointVector, q: JointVector, u: JointVector) {
        self.time.push(t);
        self.pose_ref.push(pose_ref);
        self.q_ref.push(q_ref);
        self.q.push(q);
        self.u.push(u);
        self.e.push(q - q_ref);
    }

    /// One joint's series, `joint` in `0..4`.
    pub fn joint_series(&self, series: &[JointVector], joint: usize) -> Vec<f64> {
        series.iter().map(|v| v[joint]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", CSV_COLUMNS.join(","))?;
        for i in 0..self.len() {
            let p = &self.pose_ref[i];
            let mut fields = Vec::with_capacity(CSV_COLUMNS.len());
            fields.push(self.time[i]);
            fields.extend([p.x, p.z, p.theta.to_degrees(), p.psi.to_degrees()]);
            for s in [&self.q_ref, &self.q, &self.u, &self.e] {
                fields.extend(s[i].iter().copied());
            }
            let line: Vec<String> = fields.iter().map(|v| format!("{v:.8e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_log() -> SimLog {
        let mut log = SimLog::with_capacity(1e-3, 2);
        log.metadata.push(("trajectory".into(), "hold".into()));
        let q = JointVector::new(0.665751, 0.667574, 0.667574, 0.635);
        log.push(0.0, Pose::HOME, q, q, JointVector::zeros());
        log.push(1e-3, Pose::new(0.0, 0.635, 0.1, -0.2), q, q.add_scalar(1e-4), JointVector::repeat(-0.4));
        log
    }

    #[test]
    fn csv_layout() {
        let text = sample_log().to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# trajectory = hold");
        assert_eq!(lines[1], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 4);
        for row in &lines[2..] {
            assert_eq!(row.split(',').count(), 21);
        }
        let fields: Vec<f64> = lines[3].split(',').map(|s| s.parse().unwrap()).collect();
        assert!((fields[3] - 0.1f64.to_degrees()).abs() < 1e-6);
        assert!((fields[17] - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn nine_significant_digits() {
        let text = sample_log().to_csv_string();
        let row = text.lines().nth(2).unwrap();
        let first_q = row.split(',').nth(5).unwrap();
        assert_eq!(first_q, "6.65751000e-1");
    }

    #[test]
    fn series_have_equal_length() {
        let log = sample_log();
        let n = log.len();
        assert!([log.pose_ref.len(), log.q_ref.len(), log.q.len(), log.u.len(), log.e.len()].iter().all(|&l| l == n));
        assert_eq!(log.joint_series(&log.e, 0), vec![0.0, 1e-4 + 0.665751 - 0.665751]);
    }
}
