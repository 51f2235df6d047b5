use std::collections::HashMap;

use airs_core::numerics::rel_diff;
use airs_core::single_user::allocate_elements_optimal;
use airs_experiments::config::{Command, Placement, ScenarioConfig, Scheme};
use airs_experiments::oracle::smoke_config;
use airs_experiments::record::{records_csv, ResultRecord};
use airs_experiments::sweep::run_sweep;
use airs_experiments::{resolve_out_dir, run, write_outputs};

fn by_scheme(records: &[ResultRecord], s: Scheme) -> Vec<&ResultRecord> {
    records.iter().filter(|r| r.scheme == s.name()).collect()
}

fn wsr(r: &ResultRecord) -> f64 {
    r.metrics().expect("row succeeded").wsr_bpshz
}

#[test]
fn distributed_beats_single_surfaces_over_the_n_sweep() {
    let cfg = ScenarioConfig::defaults_for(Command::SingleNSweep);
    let recs = run_sweep(Command::SingleNSweep, &cfg, 1).unwrap();
    assert_eq!(recs.len(), 4 * 10);
    let dist = by_scheme(&recs, Scheme::DistributedOpt);
    let bs = by_scheme(&recs, Scheme::BsSide);
    let us = by_scheme(&recs, Scheme::UserSide);
    let pirs = by_scheme(&recs, Scheme::Pirs);
    for i in 0..10 {
        assert!(wsr(dist[i]) >= wsr(bs[i]).max(wsr(us[i])), "N = {}", dist[i].n_total);
        assert!(wsr(bs[i]).max(wsr(us[i])) >= wsr(pirs[i]));
    }
    // More elements never hurt.
    for s in [&dist, &bs, &us, &pirs] {
        assert!(s.windows(2).all(|w| wsr(w[1]) > wsr(w[0])));
    }
}

#[test]
fn weight_endpoints_collapse_to_single_surfaces() {
    let cfg = ScenarioConfig::defaults_for(Command::SingleEpsSweep);
    let recs = run_sweep(Command::SingleEpsSweep, &cfg, 1).unwrap();
    let dist = by_scheme(&recs, Scheme::DistributedOpt);
    let bs = by_scheme(&recs, Scheme::BsSide);
    let us = by_scheme(&recs, Scheme::UserSide);
    let last = dist.len() - 1;
    assert_eq!(dist[0].epsilon, 0.0);
    assert_eq!(dist[last].epsilon, 1.0);
    assert!(rel_diff(wsr(dist[0]), wsr(bs[0])) <= 1e-9);
    assert!(rel_diff(wsr(dist[last]), wsr(us[last])) <= 1e-9);
    assert_eq!(dist[0].metrics().unwrap().n_d, 0);
    assert_eq!(dist[last].metrics().unwrap().n_u, 0);
}

#[test]
fn allocation_curves_grow_with_n_and_weight() {
    let cfg = ScenarioConfig::defaults_for(Command::AllocCurve);
    let recs = run_sweep(Command::AllocCurve, &cfg, 1).unwrap();
    let eps = cfg.series_epsilons();
    let mut nd: HashMap<(String, usize, usize), usize> = HashMap::new();
    for r in &recs {
        nd.insert((r.scheme.clone(), r.series, r.grid_index), r.metrics().unwrap().n_d);
        if r.scheme == Scheme::DistributedOpt.name() {
            let p = cfg.params_at(r.n_total, r.epsilon);
            assert_eq!(r.metrics().unwrap().n_d, allocate_elements_optimal(&p).n_d);
        }
    }
    for s in [Scheme::DistributedOpt, Scheme::DistributedEs] {
        let key = |e, g| nd[&(s.name().to_string(), e, g)];
        for e in 0..eps.len() {
            for g in 1..cfg.grid.len() {
                assert!(key(e, g) >= key(e, g - 1), "{s} not monotone in N");
            }
        }
        for g in 0..cfg.grid.len() {
            for e in 1..eps.len() {
                assert!(key(e, g) >= key(e - 1, g), "{s} not monotone in epsilon");
            }
        }
    }
}

#[test]
fn columns_are_consistent_and_rates_nonnegative() {
    for cmd in Command::SWEEPS {
        let cfg = smoke_config(cmd);
        let recs = run_sweep(cmd, &cfg, 1).unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            let m = r.metrics().unwrap_or_else(|| panic!("{cmd} {}: {:?}", r.scheme, r.outcome));
            assert!(m.ul_rate >= 0.0 && m.dl_rate >= 0.0);
            let want = (1.0 - r.epsilon) * m.ul_rate + r.epsilon * m.dl_rate;
            assert!((m.wsr_bpshz - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
        // One record per (scheme, series, grid point, drop).
        let mut keys: Vec<_> = recs.iter().map(|r| (r.scheme.clone(), r.series, r.grid_index, r.drop)).collect();
        let n = keys.len();
        keys.dedup();
        assert_eq!(keys.len(), n);
    }
}

#[test]
fn reruns_and_thread_counts_give_identical_csv() {
    for cmd in [Command::MuAdaptive, Command::MuStatic, Command::RateRegion] {
        let cfg = smoke_config(cmd);
        let a = records_csv(&run_sweep(cmd, &cfg, 1).unwrap()).unwrap();
        let b = records_csv(&run_sweep(cmd, &cfg, 1).unwrap()).unwrap();
        let c = records_csv(&run_sweep(cmd, &cfg, 3).unwrap()).unwrap();
        assert_eq!(a, b, "{cmd}");
        assert_eq!(a, c, "{cmd}");
        let mut other = cfg.clone();
        other.seed += 1;
        if cfg.placement == Placement::Disk {
            assert_ne!(a, records_csv(&run_sweep(cmd, &other, 1).unwrap()).unwrap(), "{cmd}");
        }
    }
}

#[test]
fn csv_layout() {
    let cfg = smoke_config(Command::SingleNSweep);
    let bytes = records_csv(&run_sweep(Command::SingleNSweep, &cfg, 1).unwrap()).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,series,grid_index,sweep_value,epsilon,n_total,seed,drop,wsr_bpshz,ul_rate,dl_rate,ul_weighted,dl_weighted,n_u,n_d,iterations,error"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "distributed-opt");
    assert_eq!(row[3], "2.00000000e1");
    // Nine significant digits in every float column.
    for f in &row[8..13] {
        let mantissa = f.split('e').next().unwrap();
        assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 9, "{f}");
    }
    assert_eq!(row[16], "");
}

#[test]
fn failed_rows_are_recorded_and_the_run_continues() {
    let mut cfg = smoke_config(Command::MuStatic);
    cfg.grid = vec![8.0, 9.0, 12.0];
    let out = run(Command::MuStatic, &cfg, 1).unwrap();
    assert!(!out.all_ok());
    let static_rows = by_scheme(&out.records, Scheme::MuStatic);
    assert_eq!(static_rows.len(), 3 * cfg.drops);
    for r in &static_rows {
        assert_eq!(r.ok(), r.n_total != 9, "{r:?}");
    }
    // The adaptive scheme has no parity restriction.
    assert!(by_scheme(&out.records, Scheme::MuAdaptive).iter().all(|r| r.ok()));
    let text = String::from_utf8(out.csv.clone()).unwrap();
    assert!(text.lines().any(|l| l.starts_with("mu-static,") && l.contains(",,,,,,,,") && l.contains("even")));
}

#[test]
fn region_scheme_outside_rate_region_is_a_config_error() {
    let mut cfg = smoke_config(Command::MuAdaptive);
    cfg.schemes.push(Scheme::RegionJoint);
    assert!(run_sweep(Command::MuAdaptive, &cfg, 1).is_err());
    let mut cfg = smoke_config(Command::RateRegion);
    cfg.schemes.push(Scheme::Pirs);
    assert!(run_sweep(Command::RateRegion, &cfg, 1).is_err());
}

#[test]
fn rate_region_shape() {
    let mut cfg = smoke_config(Command::RateRegion);
    cfg.n_total = 16;
    cfg.grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let recs = run_sweep(Command::RateRegion, &cfg, 1).unwrap();
    let curve = |s: Scheme| -> Vec<(f64, f64, f64)> {
        by_scheme(&recs, s)
            .iter()
            .map(|r| (r.epsilon, r.metrics().unwrap().ul_rate, r.metrics().unwrap().dl_rate))
            .collect()
    };
    let joint = curve(Scheme::RegionJoint);
    let ind = curve(Scheme::RegionIndividual);
    // No weight on the DL at the first point.
    assert_eq!(joint[0].0 * joint[0].2, 0.0);
    for (j, i) in joint.iter().zip(&ind) {
        assert!(j.1 <= i.1 + 1e-6 && j.2 <= i.2 + 1e-6);
    }
    for s in [Scheme::RegionFixedUl, Scheme::RegionFixedDl] {
        let fixed = curve(s);
        // Raw rates of a fixed design do not depend on the reporting weight.
        assert!(fixed.windows(2).all(|w| w[0].1 == w[1].1 && w[0].2 == w[1].2));
        for f in &fixed {
            assert!(joint.iter().any(|j| j.1 >= f.1 - 1e-6 && j.2 >= f.2 - 1e-6), "{s}");
        }
    }
}

#[test]
fn outputs_are_written_with_matching_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(Command::AllocCurve);
    let out = run(Command::AllocCurve, &cfg, 1).unwrap();
    assert!(out.all_ok());
    let paths = write_outputs(&out, dir.path()).unwrap();
    let csv = std::fs::read(&paths.csv).unwrap();
    assert_eq!(csv, out.csv);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(&paths.manifest).unwrap()).unwrap();
    assert_eq!(manifest["command"], "alloc-curve");
    assert_eq!(manifest["outputs"][0]["sha256"], airs_experiments::record::sha256_hex(&csv));
    assert_eq!(manifest["outputs"][0]["git_blob_sha256"], airs_experiments::record::git_blob_sha256(&csv));
    assert_eq!(manifest["rows"], out.records.len());
    assert_eq!(manifest["records"].as_array().unwrap().len(), out.records.len());
    assert_eq!(manifest["config"]["seed"], cfg.seed.to_string());
    // The echoed config parses back to the same scenario.
    let echo: String = manifest["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap()))
        .collect();
    assert_eq!(ScenarioConfig::parse(Command::AllocCurve, &echo).unwrap(), cfg);
    let summary = std::fs::read_to_string(paths.summary.unwrap()).unwrap();
    assert_eq!(summary.lines().count(), 1 + cfg.schemes.len() * 2 * cfg.grid.len());
    // Only the final files remain in the directory.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn git_blob_hash_matches_git() {
    // SHA-256 of "blob 6\0hello\n", the object id in a SHA-256 git repository.
    assert_eq!(
        airs_experiments::record::git_blob_sha256(b"hello\n"),
        "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
    );
}

#[test]
fn flag_beats_config_for_the_output_directory() {
    let mut cfg = ScenarioConfig::base();
    cfg.out_dir = "from-config".into();
    let flag = std::path::Path::new("from-flag");
    assert_eq!(resolve_out_dir(Some(flag), &cfg), flag);
}
