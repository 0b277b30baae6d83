"""Fixtures: small synthetic sweep CSVs plus the golden run directory."""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
GOLDEN = REPO / "test-artifacts" / "golden" / "run1"

# Must match the deterministic golden run the primary suite produces.
GOLDEN_ARGS = [
    "--trials", "200", "--radius-trials", "400", "--lambdas", "20,30",
    "--t-grid", "0.2:0.8:0.2", "--seed", "123", "--point-budget", "512",
]


@pytest.fixture(scope="session")
def golden_dir():
    """Golden CSVs, regenerated through the wpnoma CLI when absent."""
    if not all((GOLDEN / f"{k}.csv").is_file()
               for k in ("radius", "pmf", "throughput", "ablation")):
        if GOLDEN.exists():
            shutil.rmtree(GOLDEN)
        wpnoma = shutil.which("wpnoma")
        if wpnoma is None:
            pytest.skip("wpnoma CLI not installed; no golden CSVs to render")
        proc = subprocess.run(
            [wpnoma, "all", *GOLDEN_ARGS, "--out", str(GOLDEN)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return GOLDEN


RADIUS_HEADER = ("lambda_B,T,radius_paper_km,radius_corrected_km,"
                 "radius_exact_km,paper_radicand")

# paper column goes defined, defined, undefined, defined: one gap
RADIUS_BODY = """\
20,0.01,0.0126,0.0125,0.0124,0.000158
30,0.01,0.0103,0.0102,0.0101,0.000106
40,0.01,,0.0089,0.0088,-2e-05
50,0.01,0.008,0.0079,0.0078,6.4e-05
"""

PMF_HEADER = ("lambda_B,T,radius_km,n,pmf_analytic,pmf_empirical,"
              "tv_distance,analytic_tail_mass,overlap_probability,"
              "overlap_stderr,trials")

PMF_BODY = """\
30,0.01,0.05,0,0.4565,0.44,0.021,1e-10,0.09,0.002,5000
30,0.01,0.05,1,0.3579,0.366,0.021,1e-10,0.09,0.002,5000
30,0.01,0.05,2,0.1403,0.144,0.021,1e-10,0.09,0.002,5000
30,0.01,0.05,3,0.0367,0.037,0.021,1e-10,0.09,0.002,5000
30,0.01,0.05,4,0.0072,0.01,0.021,1e-10,0.09,0.002,5000
40,0.01,0.044,0,0.5433,0.53,0.018,1e-10,0.11,0.002,5000
40,0.01,0.044,1,0.3315,0.34,0.018,1e-10,0.11,0.002,5000
40,0.01,0.044,2,0.1011,0.102,0.018,1e-10,0.11,0.002,5000
40,0.01,0.044,3,0.0206,0.024,0.018,1e-10,0.11,0.002,5000
"""

THROUGHPUT_HEADER = ("row_kind,lambda_B,T,radius_km,rts_analytic_linear,"
                     "rts_analytic_log,rtc_analytic_log,rts_empirical,"
                     "rts_empirical_stderr,rtc_empirical,"
                     "rtc_empirical_stderr,lambda_B_active_empirical,"
                     "mean_i_inter")

THROUGHPUT_BODY = """\
grid,20,0.2,250.66,0,0.1,0.005,68.5,4.56,3.51,0.22,19.5,20.6
grid,20,0.4,354.49,0,0.08,0.004,51.9,3.15,2.59,0.16,20,7.33
grid,20,0.6,434.16,0,0.05,0.0025,29.6,1.96,1.51,0.096,19.6,12.4
optimum,20,0.2,,,,,68.5,,,,,
grid,30,0.2,307,0,0.12,0.004,84,5.12,2.9,0.16,29,9.34
grid,30,0.4,434.16,0,0.09,0.003,70.5,4.57,2.44,0.15,29,51.4
grid,30,0.6,531.74,0,0.06,0.002,39,2.68,1.38,0.085,28.4,21.9
optimum,30,0.2,,,,,84,,,,,
"""

ABLATION_HEADER = ("lambda_B,T,radius_km,rts_with,rts_with_stderr,"
                   "rts_without,rts_without_stderr,ratio_without_over_with")

ABLATION_BODY = """\
30,0.2,307,88.6,6.5,1001.9,29.7,11.31
30,0.4,434.16,75.6,4.6,804.5,14.9,10.64
30,0.6,531.74,40.2,2.8,509.4,15.0,12.66
30,0.8,614,19.5,1.6,236.2,10.3,12.14
"""


def _write(tmp_path: Path, name: str, header: str, body: str) -> Path:
    path = tmp_path / name
    path.write_text(header + "\n" + body)
    return path


@pytest.fixture
def radius_csv(tmp_path):
    return _write(tmp_path, "radius.csv", RADIUS_HEADER, RADIUS_BODY)


@pytest.fixture
def pmf_csv(tmp_path):
    return _write(tmp_path, "pmf.csv", PMF_HEADER, PMF_BODY)


@pytest.fixture
def throughput_csv(tmp_path):
    return _write(tmp_path, "throughput.csv", THROUGHPUT_HEADER, THROUGHPUT_BODY)


@pytest.fixture
def ablation_csv(tmp_path):
    return _write(tmp_path, "ablation.csv", ABLATION_HEADER, ABLATION_BODY)
