import numpy as np
import pytest

from gpsselect import PathOptions, PenaltySpec, fit, load_diabetes, standardize
from gpsselect.oracle import OracleReport, cd_lasso, kkt_residual, lasso_lambda_max, matched_l1_gap, verify
from gpsselect.path import quiet_sign_changes
from support import gaussian_design, iid_instance


@pytest.fixture(scope="module")
def diabetes():
    return standardize(load_diabetes())


def test_lambda_max_gives_zero(diabetes):
    lm = lasso_lambda_max(diabetes)
    assert lm == pytest.approx(4.296087151058997, rel=1e-12)
    assert not cd_lasso(diabetes, [lm * 1.0001]).any()
    assert cd_lasso(diabetes, [lm * 0.9]).any()


def test_cd_frozen(diabetes):
    b = cd_lasso(diabetes, [lasso_lambda_max(diabetes) / 10])[0]
    expected = [0.0, -63.751020116328746, 510.50478439960926, 227.76069732612, 0.0, 0.0,
                -161.4234757926909, 0.0, 449.0270715158901, 0.0]
    np.testing.assert_allclose(b, expected, atol=1e-6)


def test_cd_kkt(diabetes):
    lams = lasso_lambda_max(diabetes) * np.logspace(-0.1, -3, 15)
    for b, lam in zip(cd_lasso(diabetes, lams), lams):
        assert kkt_residual(diabetes, b, lam) < 1e-8


def test_cd_rejects_nonpositive(diabetes):
    with pytest.raises(ValueError):
        cd_lasso(diabetes, [0.0])


def test_report_pass_flag():
    assert OracleReport({}, "m", 1.0, 1.0 + 1e-9, 1e-8).passed
    assert not OracleReport({}, "m", 1.0, 2.0, 0.5).passed


def test_matched_l1_small_on_iid_design():
    d = iid_instance(3)
    path = fit(d, opts=PathOptions(step_budget=50000))
    gap, gaps = matched_l1_gap(path)
    assert gap < 0.05 and gaps.shape == (40,)


def test_gps_departs_from_lasso_on_diabetes(diabetes):
    # hdl shrinks along the exact lasso path while its gradient keeps its sign;
    # the path holds it, as the printed diabetes coefficients do
    with quiet_sign_changes():
        path = fit(diabetes)
    b = cd_lasso(diabetes, lasso_lambda_max(diabetes) * np.logspace(-0.01, -3, 40))[26]
    s = int(np.argmin(np.abs(path.l1 - np.abs(b).sum())))
    assert path.coef(s)[6] < b[6] - 20


def test_verify_clean_data_all_invariants_pass():
    d = gaussian_design(40, 6, seed=12)
    reports = list(verify(d, PenaltySpec.lasso(), PathOptions(step_budget=3000)))
    metrics = {r.metric for r in reports}
    assert {"df_dense_vs_reduced_maxgap", "df_explicit_vs_dense_maxgap", "cd_lasso_kkt_residual",
            "lasso_path_vs_cd_matched_l1"} <= metrics
    assert all(r.passed for r in reports if r.kind == "invariant")


def test_verify_skips_lasso_checks_for_genet():
    d = gaussian_design(80, 5, seed=1)
    with quiet_sign_changes():
        reports = list(verify(d, PenaltySpec.genet(0.5), PathOptions(step_budget=2000)))
    metrics = {r.metric for r in reports}
    assert "cd_lasso_kkt_residual" not in metrics and "df_explicit_vs_dense_maxgap" not in metrics
    assert all(r.passed for r in reports)
