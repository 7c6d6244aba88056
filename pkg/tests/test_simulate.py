from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from powerforge import (
    ConfoundSpec,
    Direction,
    ExperimentDesign,
    InvalidMetadata,
    MissingCellMean,
    PopulationModel,
    Strategy,
    confound_contribution,
    iter_batch,
    simulate_batch,
    simulate_dataset,
    split_seed,
)
from conftest import model_with_effect
from powerforge.simulate import confound_matrix


class TestSimulateDataset:
    def test_degenerate_noise_reproduces_cell_means(self, design_2x2):
        spec = ConfoundSpec(residual_sd=1e-12, participant_sd=0.0)
        means = {c: 10.0 + i for i, c in enumerate(design_2x2.conditions)}
        model = PopulationModel.from_components(design_2x2, means, spec)
        ds = simulate_dataset(model, 4, 1)
        expected = model.mean_vector()[ds.order]
        np.testing.assert_allclose(ds.responses, expected, atol=1e-9)

    def test_deterministic_per_seed(self, null_model_2x2):
        a = simulate_dataset(null_model_2x2, 8, 123)
        b = simulate_dataset(null_model_2x2, 8, 123)
        assert np.array_equal(a.responses, b.responses)
        assert np.array_equal(a.order, b.order)
        c = simulate_dataset(null_model_2x2, 8, 124)
        assert not np.array_equal(a.responses, c.responses)

    def test_participant_offsets_recoverable(self, design_2x2):
        # sigma_p = 3 with near-zero residual: the per-participant average
        # deviation from the cell means recovers the injected intercepts.
        spec = ConfoundSpec(residual_sd=1e-9, participant_sd=3.0)
        means = {c: 10.0 for c in design_2x2.conditions}
        model = PopulationModel.from_components(design_2x2, means, spec)
        ds = simulate_dataset(model, 12, 5)
        refit = (ds.responses - 10.0).mean(axis=1)
        np.testing.assert_allclose(refit, ds.participant_offsets, atol=1e-7)

    def test_row_count_invariant(self, null_model_2x2):
        ds = simulate_dataset(null_model_2x2, 6, 0)
        assert ds.responses.shape == (6, 4)
        assert len(list(ds.rows())) == 6 * 4
        assert np.isfinite(ds.responses).all()

    def test_missing_cell_mean(self, design_2x2):
        spec = ConfoundSpec(residual_sd=1.0)
        means = {c: 10.0 for c in design_2x2.conditions[:-1]}
        with pytest.raises(MissingCellMean):
            PopulationModel.from_components(design_2x2, means, spec)

    def test_needs_two_participants(self, null_model_2x2):
        with pytest.raises(InvalidMetadata):
            simulate_dataset(null_model_2x2, 1, 0)

    def test_confounds_enter_responses(self, design_2x2):
        spec = ConfoundSpec(fatigue_per_trial=2.0, residual_sd=1e-12)
        means = {c: 10.0 for c in design_2x2.conditions}
        model = PopulationModel.from_components(design_2x2, means, spec)
        ds = simulate_dataset(model, 4, 9)
        expected = np.tile(10.0 + 2.0 * np.arange(4), (4, 1))
        np.testing.assert_allclose(ds.responses, expected, atol=1e-9)


class TestConfoundMatrix:
    def test_rows_match_single_sequence_contract(self):
        rng = np.random.default_rng(3)
        order = rng.integers(0, 4, size=(6, 12))
        spec = ConfoundSpec(
            fatigue_per_trial=1.5,
            carryover_magnitude=4.0,
            carryover_decay=0.3,
            practice_within_condition=-0.7,
            practice_whole_experiment=-0.2,
            residual_sd=1.0,
        )
        for direction in Direction:
            matrix = confound_matrix(order, spec, direction)
            for p in range(6):
                np.testing.assert_allclose(
                    matrix[p], confound_contribution(order[p], spec, direction), rtol=1e-12
                )


class TestBatch:
    def test_k1_reduces_to_split_zero(self, null_model_2x2):
        batch = simulate_batch(null_model_2x2, 6, 1, 77)
        direct = simulate_dataset(null_model_2x2, 6, split_seed(77, 0), index=0)
        assert np.array_equal(batch.datasets[0].responses, direct.responses)

    def test_parallel_equals_serial(self, null_model_2x2):
        serial = [ds.responses for ds in iter_batch(null_model_2x2, 6, 42, range(16))]
        with ThreadPoolExecutor(max_workers=4) as pool:
            parallel = list(
                pool.map(
                    lambda j: simulate_dataset(
                        null_model_2x2, 6, split_seed(42, j), index=j
                    ).responses,
                    range(16),
                )
            )
        for a, b in zip(serial, parallel):
            assert np.array_equal(a, b)

    def test_subrange_independent_of_surroundings(self, null_model_2x2):
        full = [ds.responses for ds in iter_batch(null_model_2x2, 4, 9, range(10))]
        tail = [ds.responses for ds in iter_batch(null_model_2x2, 4, 9, range(5, 10))]
        for a, b in zip(full[5:], tail):
            assert np.array_equal(a, b)

    def test_calibration_grand_mean(self):
        # k=2 keeps the participant-intercept share of the grand-mean variance
        # inside the stated 4-sigma envelope.
        from powerforge import DependentVariableMeta, IndependentVariable

        dv = DependentVariableMeta("DV", "u", 0, 20, Direction.LOWER_IS_BETTER, 1.0)
        design = ExperimentDesign(
            ivs=(IndependentVariable("A", ("x", "y")),),
            dv=dv,
            strategy=Strategy.LATIN_SQUARE,
            replications=1,
            participants=4,
        )
        spec = ConfoundSpec(residual_sd=1.0, participant_sd=0.5)
        model = PopulationModel.from_components(design, {("x",): 10.0, ("y",): 10.0}, spec)
        k_batch, n, cells = 10_000, 4, 2
        total = 0.0
        for ds in iter_batch(model, n, 2024, range(k_batch)):
            total += ds.responses.mean()
        grand = total / k_batch
        sigma_total = np.hypot(1.0, 0.5)
        bound = 4 * sigma_total / np.sqrt(k_batch * n * cells)
        assert abs(grand - 10.0) < bound

    def test_fatigue_linearity_in_fitted_slope(self, design_2x2):
        def fitted_slope(fatigue):
            spec = ConfoundSpec(fatigue_per_trial=fatigue, residual_sd=0.2)
            means = {c: 10.0 for c in design_2x2.conditions}
            model = PopulationModel.from_components(design_2x2, means, spec)
            t = np.arange(4)
            acc = np.zeros(4)
            count = 0
            for ds in iter_batch(model, 8, 55, range(400)):
                acc += ds.responses.mean(axis=0)
                count += 1
            mean_by_trial = acc / count
            return np.polyfit(t, mean_by_trial, 1)[0]

        s1 = fitted_slope(1.0)
        s2 = fitted_slope(2.0)
        assert s2 / s1 == pytest.approx(2.0, rel=0.05)

    def test_dataset_means_uncorrelated_across_batch(self, null_model_2x2):
        k_batch = 400
        means = np.array(
            [ds.responses.mean() for ds in iter_batch(null_model_2x2, 4, 31, range(k_batch))]
        )
        centered = means - means.mean()
        rho = (centered[:-1] * centered[1:]).sum() / (centered**2).sum()
        assert abs(rho) < 4 / np.sqrt(k_batch)


class TestEffectModelIntegration:
    def test_injected_effect_shows_in_marginals(self, design_2x2):
        model = model_with_effect(design_2x2, delta=2.0, residual_sd=1e-9)
        ds = simulate_dataset(model, 4, 3)
        conditions = design_2x2.conditions
        s_mask = np.array([c[0] == "S" for c in conditions])[ds.order]
        assert ds.responses[s_mask].mean() == pytest.approx(12.0, abs=1e-6)
        assert ds.responses[~s_mask].mean() == pytest.approx(10.0, abs=1e-6)
