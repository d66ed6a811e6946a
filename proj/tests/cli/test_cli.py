"""Command-line integration: exit codes, summary schema, CSV files, hashes and reruns."""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BIN = pathlib.Path(sys.argv[1]).resolve()
ROOT = pathlib.Path(sys.argv[2]).resolve()
SCHEMA = json.loads((ROOT / "docs" / "report-schema.json").read_text())
CONFIGS = ROOT / "configs"

UNSTABLE = {"system": {"T": 1, "d1": 1, "d2": 1, "r1": 1, "r2": 1, "a1": 1, "a2": 1, "k1": 0.5, "k2": 0.5},
            "speed": {"homogenized": True}}


def fnv1a(text):
    h = 14695981039346656037
    for b in text.encode():
        h = ((h ^ b) * 1099511628211) % (1 << 64)
    return f"{h:016x}"


def run(verb, config, out, *extra):
    p = subprocess.run([str(BIN), verb, "--config", str(config), "--out", str(out), *extra],
                       capture_output=True, text=True, timeout=600)
    return p.returncode, p.stdout, p.stderr


class Cli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = pathlib.Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def summary(self, out):
        s = json.loads((out / "summary.json").read_text())
        jsonschema.validate(s, SCHEMA)
        return s

    def check_tables(self, out, s):
        for t in s["tables"]:
            with open(out / t["file"], newline="") as f:
                rows = list(csv.reader(f))
            self.assertEqual(rows[0], t["columns"])
            self.assertEqual(len(rows) - 1, t["row_count"])
            for r in rows[1:]:
                self.assertEqual(len(r), len(t["columns"]))

    def test_passing_verbs(self):
        for verb, cfg in [("check-assumptions", "check_assumptions"), ("logistic", "logistic"),
                          ("kinetics", "kinetics"), ("simulate", "simulate")]:
            with self.subTest(verb=verb):
                out = self.dir / verb
                code, stdout, _ = run(verb, CONFIGS / f"{cfg}.json", out)
                self.assertEqual(code, 0, stdout)
                s = self.summary(out)
                self.assertEqual(s["status"], "pass")
                self.assertEqual(s["verb"], verb)
                self.assertTrue(all(c.endswith(": pass") for c in s["checks"]))
                self.check_tables(out, s)

    def test_hash_matches_embedded_config(self):
        out = self.dir / "h"
        run("check-assumptions", CONFIGS / "check_assumptions.json", out)
        s = self.summary(out)
        text = json.dumps(s["config"], sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        self.assertEqual(s["config_hash"], fnv1a(text))
        self.assertNotIn("include", s["config"])
        self.assertEqual(s["config"]["system"]["preset"], "step_competition")

    def test_overrides_are_embedded(self):
        a, b = self.dir / "a", self.dir / "b"
        run("simulate", CONFIGS / "simulate.json", a)
        code, _, _ = run("simulate", CONFIGS / "simulate.json", b,
                         "--grid", "h=0.2,L=40,m=128", "--periods", "6,0", "--threads", "2")
        self.assertEqual(code, 0)
        sa, sb = self.summary(a), self.summary(b)
        self.assertEqual(sb["config"]["grid"], {"h": 0.2, "L": 40, "m": 128})
        self.assertEqual(sb["config"]["periods"], {"run": 6, "discard": 0})
        self.assertEqual(sb["config"]["threads"], 2)
        self.assertNotEqual(sa["config_hash"], sb["config_hash"])
        self.assertEqual(sb["metrics"]["periods"], 6)
        self.assertAlmostEqual(sb["metrics"]["dt"], 1 / 128)

    def test_rerun_is_bitwise_identical(self):
        a, b = self.dir / "a", self.dir / "b"
        for out in (a, b):
            self.assertEqual(run("kinetics", CONFIGS / "kinetics.json", out)[0], 0)
        files = sorted(p.name for p in a.iterdir())
        self.assertEqual(files, sorted(p.name for p in b.iterdir()))
        for name in files:
            self.assertEqual((a / name).read_bytes(), (b / name).read_bytes(), name)

    def test_criterion_failure_exits_2(self):
        cfg = self.dir / "unstable.json"
        cfg.write_text(json.dumps(UNSTABLE))
        code, _, _ = run("check-assumptions", cfg, self.dir / "o")
        self.assertEqual(code, 2)
        s = self.summary(self.dir / "o")
        self.assertEqual(s["status"], "fail")
        self.assertFalse(s["metrics"]["zero_and_one_stable"])

    def test_solver_error_exits_3_with_summary(self):
        cfg = self.dir / "narrow.json"
        cfg.write_text(json.dumps({"include": str(CONFIGS / "common" / "step_competition.json"),
                                   "grid": {"h": 0.1, "L": 3}, "limits_small": {"periods": [0.4, 0.2]}}))
        code, _, stderr = run("limits-small", cfg, self.dir / "o")
        self.assertEqual(code, 3)
        s = self.summary(self.dir / "o")
        self.assertEqual(s["status"], "error")
        self.assertIn(s["error"], stderr)
        cfg.write_text(json.dumps(UNSTABLE))
        self.assertEqual(run("speed", cfg, self.dir / "p")[0], 3)

    def test_usage_and_config_errors_exit_1(self):
        self.assertEqual(subprocess.run([str(BIN)], capture_output=True).returncode, 1)
        self.assertEqual(subprocess.run([str(BIN), "nonsense"], capture_output=True).returncode, 1)
        self.assertEqual(run("logistic", self.dir / "missing.json", self.dir / "o")[0], 1)
        bad = self.dir / "bad.json"
        for doc in ['{"sytem": {}}', '{"include": "bad.json"}', '{"system": {"preset": "x"}}', "{"]:
            bad.write_text(doc)
            self.assertEqual(run("logistic", bad, self.dir / "o")[0], 1, doc)
        self.assertEqual(run("logistic", CONFIGS / "logistic.json", self.dir / "o", "--grid", "h=x")[0], 1)
        self.assertEqual(run("logistic", CONFIGS / "logistic.json", self.dir / "o", "--threads", "0")[0], 1)
        self.assertFalse((self.dir / "o" / "summary.json").exists())

    def test_every_shipped_config_resolves(self):
        verbs = {"check_assumptions": "check-assumptions", "logistic": "logistic", "logistic_step": "logistic"}
        for cfg in sorted(CONFIGS.glob("*.json")):
            with self.subTest(config=cfg.name):
                if cfg.stem in verbs:
                    self.assertEqual(run(verbs[cfg.stem], cfg, self.dir / cfg.stem)[0], 0)
                else:
                    # Resolution and validation only: an unstable override would fail, a bad config exits 1.
                    code, _, _ = run("check-assumptions", cfg, self.dir / cfg.stem)
                    self.assertEqual(code, 0)


if __name__ == "__main__":
    unittest.main(argv=sys.argv[:1], verbosity=2)
