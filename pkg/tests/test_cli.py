import csv

import pytest

from slvalab.cli import main, parse_snr_grid


def read_csv(path):
    with open(path) as fh:
        meta = []
        rows = []
        header = None
        for line in fh:
            if line.startswith("#"):
                meta.append(line.strip())
                continue
            if header is None:
                header = line.strip().split(",")
            else:
                rows.append(line.strip())
    parsed = list(csv.reader(rows))
    return meta, header, parsed


def test_parse_snr_grid():
    assert parse_snr_grid("0:0.5:2") == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert parse_snr_grid("-2,3.7") == [-2.0, 3.7]
    assert parse_snr_grid("4") == [4.0]
    with pytest.raises(ValueError):
        parse_snr_grid("0:0:2")


def test_simulate_subcommand(tmp_path):
    out = tmp_path / "sim.csv"
    rc = main([
        "simulate", "--cc", "13,17", "--crc", "0x9", "--k", "16",
        "--snr-db", "1", "--frames", "2000", "--seed", "3", "--out", str(out),
    ])
    assert rc == 0
    meta, header, rows = read_csv(out)
    assert header == ["snr_db", "fer", "p_ue", "p_nack", "e_nlva", "var_nlva", "e_ilva", "frames", "seed"]
    assert len(rows) == 1 and rows[0][7] == "2000"
    # determinism across invocations
    out2 = tmp_path / "sim2.csv"
    main([
        "simulate", "--cc", "13,17", "--crc", "0x9", "--k", "16",
        "--snr-db", "1", "--frames", "2000", "--seed", "3", "--out", str(out2),
    ])
    assert out.read_bytes() == out2.read_bytes()


def test_spectrum_subcommand(tmp_path):
    out = tmp_path / "spec.csv"
    main(["spectrum", "--cc", "13,17", "--crc", "0x43", "--k", "256", "--dmax", "13", "--out", str(out)])
    meta, header, rows = read_csv(out)
    assert header == ["d", "b_d", "a_d"]
    table = {int(r[0]): (int(r[1]), int(r[2])) for r in rows}
    assert table[6] == (261, 0)
    assert table[12][1] == 668
    assert any("d_free=6" in m and "d_crc=12" in m for m in meta)


def test_crc_search_subcommand(tmp_path):
    out = tmp_path / "search.csv"
    main(["crc-search", "--cc", "13,17", "--m", "3", "--k", "64", "--depth", "12", "--out", str(out)])
    meta, header, rows = read_csv(out)
    assert header == ["rank", "crc", "d_crc", "in_tie_set", "a_profile"]
    assert rows[0][1] == "0x9"
    assert any("winner=0x9" in m for m in meta)


def test_bounds_subcommand(tmp_path):
    out = tmp_path / "bounds.csv"
    out_l = tmp_path / "tail.csv"
    main([
        "bounds", "--cc", "13,17", "--crc", "0x43", "--k", "64",
        "--snr-db", "0:1:4", "--dmax", "16", "--dtilde", "16",
        "--var-nlva", "0.2823", "--l-grid", "1:1:8", "--out-list", str(out_l),
        "--out", str(out),
    ])
    meta, header, rows = read_csv(out)
    assert header == ["snr_db", "union_ue", "union_nack", "nna_ue", "nna_nack", "ue1_low_snr_limit"]
    ue = [float(r[1]) for r in rows]
    assert all(a >= b for a, b in zip(ue, ue[1:]))
    _, lheader, lrows = read_csv(out_l)
    assert lheader == ["l", "markov", "chebyshev"]
    assert float(lrows[0][1]) == 1.0
    assert lrows[0][2] == ""  # Chebyshev undefined at L=1


def test_capacity_subcommand(tmp_path):
    out = tmp_path / "cap.csv"
    main([
        "capacity", "--model", "llb", "--cc", "13,17", "--crc", "0x9", "--k", "12",
        "--snr-db", "2", "--frames", "3000", "--out", str(out),
    ])
    _, header, rows = read_csv(out)
    assert header == ["snr_db", "capacity", "ci95", "epsilon", "alpha"]
    assert 0.0 <= float(rows[0][1]) <= 12.0


def test_capacity_true_model_subcommand(tmp_path):
    out = tmp_path / "cap_true.csv"
    main([
        "capacity", "--model", "true", "--cc", "13,17", "--crc", "0x9", "--k", "6",
        "--snr-db", "2", "--frames", "100000", "--per-use", "--out", str(out),
    ])
    _, header, rows = read_csv(out)
    assert header == ["snr_db", "capacity", "ci95", "epsilon", "alpha"]
    n_channel = 2 * (6 + 3 + 3)
    assert 0.0 <= float(rows[0][1]) <= 6.0 / n_channel  # per-channel-bit units


def test_complexity_subcommand(tmp_path):
    out = tmp_path / "cx.csv"
    main([
        "complexity", "--cc", "13,17", "--crc", "0x9", "--k", "16",
        "--snr-db", "2", "--l-grid", "1:1:6", "--frames", "3000", "--out", str(out),
    ])
    _, header, rows = read_csv(out)
    assert header == ["l", "e_nlva", "e_ilva", "r_trace", "r_ins", "r_total", "scaled_ops"]
    for r in rows:
        assert float(r[5]) == pytest.approx(1.0 + float(r[3]) + float(r[4]), rel=1e-9)
    e_n = [float(r[1]) for r in rows]
    assert all(a <= b + 1e-12 for a, b in zip(e_n, e_n[1:]))


def test_design_sweep_subcommand(tmp_path):
    pairs = tmp_path / "pairs.csv"
    pairs.write_text('cc,crc\n"13,17",0x9\n"13,17",\n')
    out = tmp_path / "sweep.csv"
    main([
        "design-sweep", "--pairs", str(pairs), "--k", "32", "--target-fer", "1e-2",
        "--frames", "4000", "--out", str(out),
    ])
    _, header, rows = read_csv(out)
    assert header[:6] == ["cc", "crc", "m", "v", "snr_star_db", "gap_db"]
    assert len(rows) == 2
    assert {r[1] for r in rows} == {"0x9", "none"}


def test_config_file_with_flag_override(tmp_path):
    cfgfile = tmp_path / "sim.cfg"
    cfgfile.write_text("cc=13,17\ncrc=0x9\nk=16\nsnr-db=1\nframes=9999\nseed=3\n")
    out = tmp_path / "a.csv"
    main(["simulate", "--config", str(cfgfile), "--frames", "1000", "--out", str(out)])
    _, _, rows = read_csv(out)
    assert rows[0][7] == "1000"  # explicit flag beat the file
    out2 = tmp_path / "b.csv"
    main(["simulate", "--config", str(cfgfile), "--out", str(out2)])
    _, _, rows2 = read_csv(out2)
    assert rows2[0][7] == "9999"  # file value applies when no flag is given


def test_config_file_rejects_malformed_lines(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this is not a pair\n")
    with pytest.raises(ValueError):
        main(["simulate", "--config", str(bad), "--cc", "13,17", "--k", "8",
              "--snr-db", "1", "--out", str(tmp_path / "x.csv")])
