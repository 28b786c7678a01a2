import time

import numpy as np
import pytest

from timebin_analyzer import quantum as q
from timebin_analyzer import states as st
from timebin_analyzer import verify
from timebin_analyzer.measurement import AnalyzerEfficiencies

from oracles import jacobi_eigvalsh

EFF = AnalyzerEfficiencies(0.9, 0.9)


def classically_correlated():
    """1/2 (|HE><HE| + |VL><VL|), perfect z correlations, no coherence."""
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 0.5
    m[3, 3] = 0.5
    return q.DensityMatrix(m, 2, 2)


class TestBuildConstraints:
    def test_maximally_mixed_satisfies_zero_visibilities(self):
        cs = verify.build_constraints(0.0, 0.0, AnalyzerEfficiencies(1.0, 1.0))
        res = cs.residuals(np.eye(6, dtype=complex) / 6.0)
        assert max(abs(v) for v in res.values()) < 1e-12

    def test_classical_state_satisfies_perfect_z(self):
        cs = verify.build_constraints(1.0, 0.0, EFF)
        rho = st.embed_2x3(classically_correlated(), 1.0).matrix
        res = cs.residuals(rho)
        for label in ("trace", "vis_plus_z", "vis_minus_z", "vis_xy"):
            assert abs(res[label]) < 1e-12, label

    def test_operators_block_diagonal(self):
        cs = verify.build_constraints(0.952, 0.804, EFF)
        vac, qub = [0, 3], [1, 2, 4, 5]
        for op in cs.operators:
            for i in vac:
                for j in qub:
                    assert abs(op[i, j]) < 1e-15
                    assert abs(op[j, i]) < 1e-15

    def test_rank_deficiency_warning(self):
        with pytest.warns(RuntimeWarning):
            verify.build_constraints(0.5, 0.5, AnalyzerEfficiencies(0.0, 0.0))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            verify.build_constraints(1.5, 0.0, EFF)
        with pytest.raises(ValueError):
            verify.build_constraints(0.5, 0.0, EFF, qubit_mass=0.0)


class TestSdpFeasible:
    def test_measured_point_infeasible(self):
        start = time.perf_counter()
        report = verify.sdp_feasible(verify.build_constraints(0.952, 0.804, EFF))
        elapsed = time.perf_counter() - start
        assert report.verdict == "INFEASIBLE"
        assert report.margin < -1e-3
        assert elapsed < 10.0

    def test_perfect_z_zero_xy_feasible_with_witness(self):
        report = verify.sdp_feasible(verify.build_constraints(1.0, 0.0, EFF))
        assert report.feasible
        witness = report.witness
        assert witness is not None
        assert q.min_eigenvalue(witness) >= -1e-8
        assert q.min_eigenvalue(q.partial_transpose(witness, 2, 3)) >= -1e-8

    def test_zero_visibilities_strictly_interior(self):
        report = verify.sdp_feasible(verify.build_constraints(0.0, 0.0, EFF))
        assert report.feasible
        assert report.margin == pytest.approx(1.0 / 6.0, abs=1e-6)

    def test_determinism(self):
        cs = verify.build_constraints(0.9, 0.42, EFF)
        r1 = verify.sdp_feasible(cs)
        r2 = verify.sdp_feasible(cs)
        assert r1.margin == r2.margin
        assert r1.iterations == r2.iterations

    def test_witness_invariant_on_feasible_sweep(self):
        for v_xy in (0.0, 0.1, 0.2, 0.3):
            cs = verify.build_constraints(0.9, v_xy, EFF)
            report = verify.sdp_feasible(cs)
            assert report.feasible
            res = cs.residuals(report.witness)
            assert max(abs(v) for v in res.values()) < 1e-8
            assert q.min_eigenvalue(report.witness) >= -1e-8

    def test_infeasible_stable_under_tighter_tolerance(self):
        cs = verify.build_constraints(0.952, 0.804, EFF)
        assert not verify.sdp_feasible(cs, tol=1e-7).feasible
        assert not verify.sdp_feasible(cs, tol=1e-8).feasible

    def test_qubit_mass_does_not_change_verdicts(self):
        for mass in (0.3, 2.0 / 3.0, 0.9):
            infeasible = verify.sdp_feasible(
                verify.build_constraints(0.952, 0.804, EFF, qubit_mass=mass)
            )
            feasible = verify.sdp_feasible(
                verify.build_constraints(0.9, 0.3, EFF, qubit_mass=mass)
            )
            assert not infeasible.feasible
            assert feasible.feasible


class TestAlternatingProjections:
    @pytest.mark.parametrize(
        "v_z, v_xy, expected",
        [(0.952, 0.804, False), (1.0, 0.0, True), (0.0, 0.0, True), (0.9, 0.3, True)],
    )
    def test_agreement_with_margin_solver(self, v_z, v_xy, expected):
        cs = verify.build_constraints(v_z, v_xy, EFF)
        assert verify.sdp_feasible(cs).feasible is expected
        feasible, _, _ = verify.alternating_projections(cs)
        assert feasible is expected


class TestBlockDiagonalRestriction:
    def test_verdicts_match_full_problem(self):
        for v_z, v_xy in ((0.952, 0.804), (0.9, 0.3), (0.0, 0.0)):
            cs = verify.build_constraints(v_z, v_xy, EFF)
            full = verify.sdp_feasible(cs)
            block = verify.sdp_feasible(verify.block_diagonal_restriction(cs))
            assert full.feasible == block.feasible
            assert block.margin == pytest.approx(full.margin, abs=1e-6)

    def test_mixed_state_remains_feasible_in_restricted_form(self):
        cs = verify.block_diagonal_restriction(
            verify.build_constraints(0.0, 0.0, EFF)
        )
        report = verify.sdp_feasible(cs)
        assert report.feasible and report.margin > 0.1

    def test_structure_violation_detected(self):
        cs = verify.build_constraints(0.9, 0.3, EFF)
        bad = cs.operators[1].copy()
        bad[0, 1] = 0.1
        bad[1, 0] = 0.1
        cs.operators[1] = bad
        with pytest.raises(verify.StructureError):
            verify.block_diagonal_restriction(cs)

    def test_threshold_agreement_on_grid(self):
        # Restricted and full problems give the same bisection threshold.
        grid = [0.85, 0.9, 0.952]
        full_points = verify.boundary_scan(grid, EFF)
        for point in full_points:
            v_z, thr = point.v_z, point.threshold
            cs_lo = verify.block_diagonal_restriction(
                verify.build_constraints(v_z, thr - 2e-3, EFF)
            )
            cs_hi = verify.block_diagonal_restriction(
                verify.build_constraints(v_z, thr + 1e-3, EFF)
            )
            assert verify.sdp_feasible(cs_lo).feasible
            assert not verify.sdp_feasible(cs_hi).feasible


class TestPptOracle:
    def werner(self, p):
        bell = st.hybrid_bell_state().matrix
        return q.DensityMatrix(
            p * bell + (1 - p) * np.eye(4, dtype=complex) / 4.0, 2, 2
        )

    @pytest.mark.parametrize(
        "p, expected",
        [(0.2, False), (1 / 3 - 0.01, False), (1 / 3 + 0.01, True), (0.9, True)],
    )
    def test_werner_transition(self, p, expected):
        state = st.embed_2x3(self.werner(p), 1.0)
        assert verify.ppt_oracle(state) is expected
        # Closed form of the smallest partial-transpose eigenvalue in
        # the qubit sector is (1 - 3p)/4; cross-check with the Jacobi
        # eigensolver oracle.
        pt = self.werner(p).partial_transpose()
        assert jacobi_eigvalsh(pt)[0] == pytest.approx((1 - 3 * p) / 4.0, abs=1e-9)

    def test_transition_located_by_bisection(self):
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-3:
            mid = 0.5 * (lo + hi)
            if verify.ppt_oracle(st.embed_2x3(self.werner(mid), 1.0)):
                hi = mid
            else:
                lo = mid
        assert hi == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_product_states(self):
        rng = np.random.default_rng(25)
        for _ in range(5):
            a = rng.dirichlet([1, 1])
            b = rng.dirichlet([1, 1, 1])
            rho = q.DensityMatrix(q.tensor(np.diag(a), np.diag(b)), 2, 3)
            assert verify.ppt_oracle(rho) is False

    def test_pure_bell_state(self):
        state = st.embed_2x3(st.hybrid_bell_state(), 1.0)
        assert verify.ppt_oracle(state) is True
        min_eig = q.min_eigenvalue(state.partial_transpose())
        assert min_eig == pytest.approx(-0.5, abs=1e-10)


class TestBoundaryScan:
    def test_measured_point_above_bound(self):
        points = verify.boundary_scan([0.952], EFF)
        assert points[0].bracketed
        assert points[0].threshold < 0.804

    def test_monotone_and_bracketed(self):
        points = verify.boundary_scan([0.8, 0.9, 1.0], EFF)
        thresholds = [p.threshold for p in points]
        assert all(
            thresholds[i] >= thresholds[i + 1] - 1e-9
            for i in range(len(thresholds) - 1)
        )
        assert all(p.bracketed for p in points)

    def test_rows_export(self):
        points = verify.boundary_scan([0.9], EFF)
        header, rows = verify.boundary_to_rows(points)
        assert header == ["v_z", "v_xy_threshold", "margin", "iterations"]
        assert len(rows) == 1 and rows[0][0] == 0.9
