"""
Tests for the steering controllers, the regressor and its training.
"""

import math

import numpy as np
import pytest

from lanebench.core.exceptions import ConfigError, ControllerError, MissingInputError, TrainingDivergenceError
from lanebench.schemas.campaign import ControllerSpec, TrainSpec
from lanebench.schemas.simulation import SimConfig
from lanebench.sim.dynamics import VehicleState
from lanebench.sim.world import build_road
from ml.inference.controllers import (
    BiasedController,
    Episode,
    Frame,
    LearnedController,
    NoisyController,
    OracleController,
    WindowedController,
    build_controller,
    oracle_steering,
    reference_drive,
)
from ml.preprocessing.frame_features import FrameFeatureExtractor
from ml.training.train_regressor import (
    forward,
    gradient_check,
    init_params,
    is_saturated,
    load_model,
    predict,
    save_model,
    train_regressor,
)


@pytest.fixture
def params():
    return init_params(32 * 32, 16, seed=11)


@pytest.fixture
def frames():
    rng = np.random.default_rng(5)
    return [Frame(image=rng.uniform(0.0, 1.0, size=(32, 32)), index=i) for i in range(8)]


class TestOracleSteering:
    def test_centered_on_straight_road(self, make_scenario):
        road = build_road(make_scenario())
        assert oracle_steering(road, VehicleState(20.0, 0.0, 0.0, 10.0)) == 0.0

    def test_steers_back_toward_center(self, make_scenario):
        road = build_road(make_scenario())
        # Left of center: steer right (positive)
        assert oracle_steering(road, VehicleState(20.0, 0.3, 0.0, 10.0)) > 0.0
        assert oracle_steering(road, VehicleState(20.0, -0.3, 0.0, 10.0)) < 0.0

    def test_steady_state_matches_road_radius(self, make_scenario):
        scenario = make_scenario(road_topology="left-curved", curvature=0.01, road_length=300.0)
        road = build_road(scenario)
        drive = reference_drive(road, scenario)
        steady = drive.labels[250:]
        assert np.ptp(steady) < 1e-3
        delta = -float(np.mean(steady)) * math.radians(25.0)
        radius = SimConfig().wheelbase / math.tan(delta)
        assert radius == pytest.approx(100.0, rel=0.05)

    def test_reference_drive_truncates_at_road_end(self, make_scenario):
        scenario = make_scenario(road_length=60.0)
        drive = reference_drive(build_road(scenario), scenario)
        assert drive.truncated
        assert 0 < len(drive) < SimConfig().steps_m


class TestPredict:
    def test_learned_output_in_range(self, params, frames):
        controller = LearnedController(params)
        for frame in frames:
            assert -1.0 <= controller.predict([frame]) <= 1.0

    def test_predict_is_pure(self, params, frames):
        controller = LearnedController(params)
        assert controller.predict(frames[:1]) == controller.predict(frames[:1])

    def test_empty_frames_rejected(self, params):
        with pytest.raises(ControllerError):
            LearnedController(params).predict([])

    def test_learned_needs_images(self, params):
        with pytest.raises(ControllerError):
            LearnedController(params).predict([Frame(image=None)])

    def test_bias_added(self, constant_controller, blank_frame):
        assert BiasedController(constant_controller(0.0), 0.03).predict([blank_frame]) == pytest.approx(0.03)

    def test_bias_clamped(self, constant_controller, blank_frame):
        assert BiasedController(constant_controller(0.5), 2.0).predict([blank_frame]) == 1.0
        assert BiasedController(constant_controller(-0.5), -2.0).predict([blank_frame]) == -1.0

    def test_noise_seeded_by_frame_index(self, constant_controller):
        noisy = NoisyController(constant_controller(0.0), sigma=0.05, seed=3)
        first = noisy.predict([Frame(image=None, index=4)])
        assert first == noisy.predict([Frame(image=None, index=4)])
        assert first != noisy.predict([Frame(image=None, index=5)])
        assert first != 0.0

    def test_windowed_constant_frames_match_stateless(self, params, frames):
        stateless = LearnedController(params).predict([frames[0]])
        windowed = WindowedController(params, window=5)
        assert windowed.predict([frames[0]] * 5) == pytest.approx(stateless, abs=1e-12)
        # Short histories are padded with their first frame
        assert windowed.predict([frames[0]]) == pytest.approx(stateless, abs=1e-12)

    def test_windowed_sees_history(self, params, frames):
        windowed = WindowedController(params, window=5)
        assert windowed.predict(frames[:5]) != windowed.predict(frames[4:5])

    def test_replay_oracle_returns_reference_labels(self, make_scenario):
        scenario = make_scenario(road_topology="s-curve", curvature=0.01)
        episode = Episode.from_scenario(scenario)
        drive = reference_drive(episode.road, scenario)
        oracle = OracleController("replay")
        oracle.reset(episode)
        for j in (0, 120, 499):
            assert oracle.predict([Frame(image=None, index=j)]) == drive.labels[j]

    def test_pursuit_oracle_needs_pose(self, make_scenario):
        oracle = OracleController("pursuit")
        oracle.reset(Episode.from_scenario(make_scenario()))
        with pytest.raises(ControllerError):
            oracle.predict([Frame(image=None, index=0)])

    def test_unbound_oracle(self):
        with pytest.raises(ControllerError):
            OracleController().predict([Frame(image=None)])


class TestFrameFeatures:
    def test_standardized(self, frames):
        features = FrameFeatureExtractor().transform(frames[0].image)
        assert features.shape == (1024,)
        assert features.mean() == pytest.approx(0.0, abs=1e-12)
        assert features.std() == pytest.approx(1.0)

    def test_brightness_invariant(self, frames):
        extractor = FrameFeatureExtractor()
        np.testing.assert_allclose(
            extractor.transform(frames[0].image * 0.6), extractor.transform(frames[0].image), atol=1e-9
        )

    def test_flat_frame_gives_zeros(self):
        assert np.all(FrameFeatureExtractor().transform(np.ones((32, 32))) == 0.0)

    def test_median_filter_removes_isolated_specks(self):
        image = np.full((8, 8), 0.3)
        image[:, 4:6] = 0.9
        speckled = image.copy()
        speckled[2, 1] = 1.0
        extractor = FrameFeatureExtractor()
        np.testing.assert_allclose(extractor.transform(speckled), extractor.transform(image))


class TestTraining:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        params = init_params(12, 6, seed=3)
        X = rng.normal(size=(16, 12))
        targets = rng.uniform(-0.5, 0.5, size=16)
        probes = gradient_check(params, X, targets, n_probes=10, seed=2)
        assert len(probes) == 40
        assert {p["param"] for p in probes} == {"W1", "b1", "W2", "b2"}
        for probe in probes:
            scale = max(abs(probe["analytic"]), abs(probe["numeric"]))
            assert probe["abs_error"] <= 1e-4 * scale + 1e-9, probe

    def test_constant_label_is_learned(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 10)) * 0.1
        y = np.full(200, 0.2)
        spec = TrainSpec(learning_rate=0.05, epochs=100, hidden=8, batch_size=32, validation_fraction=0.0)
        params, report = train_regressor(X, y, spec)
        assert report.final_train_mae < 0.02
        assert len(report.epochs) == 100
        assert np.abs(predict(params, X) - 0.2).mean() < 0.02

    def test_zero_epochs_returns_initialization(self):
        X = np.random.default_rng(0).normal(size=(20, 5))
        params, report = train_regressor(X, np.zeros(20), TrainSpec(epochs=0, hidden=4, seed=9))
        initial = init_params(5, 4, seed=9)
        for name, array in initial.arrays().items():
            np.testing.assert_array_equal(getattr(params, name), array)
        assert report.epochs == []

    def test_training_is_deterministic(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(60, 8))
        y = np.tanh(X[:, 0]) * 0.3
        spec = TrainSpec(epochs=5, hidden=6, seed=1)
        first, _ = train_regressor(X, y, spec)
        second, _ = train_regressor(X, y, spec)
        for name, array in first.arrays().items():
            np.testing.assert_array_equal(getattr(second, name), array)

    def test_validation_split_reported(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(100, 8))
        _, report = train_regressor(X, np.zeros(100), TrainSpec(epochs=2, hidden=4, validation_fraction=0.2))
        assert (report.n_train, report.n_val) == (80, 20)
        assert report.final_val_mae is not None

    def test_divergence_names_epoch(self):
        X = np.full((10, 3), np.nan)
        with pytest.raises(TrainingDivergenceError) as exc_info:
            train_regressor(X, np.zeros(10), TrainSpec(epochs=3, hidden=2, validation_fraction=0.0))
        assert exc_info.value.epoch == 1

    def test_saturated_output_is_rejected(self):
        # Zero inputs and a huge step pin every prediction at +1, where tanh has no gradient
        X = np.zeros((20, 4))
        spec = TrainSpec(learning_rate=1000.0, momentum=0.0, epochs=3, hidden=4, validation_fraction=0.0)
        with pytest.raises(TrainingDivergenceError) as exc_info:
            train_regressor(X, np.full(20, 0.5), spec)
        assert exc_info.value.epoch == 3
        assert "saturated" in exc_info.value.message

    def test_saturation_check(self):
        assert is_saturated(np.full(5, 1.0), np.full(5, 0.05))
        assert is_saturated(np.full(5, -0.995), np.linspace(-0.1, 0.1, 5))
        assert not is_saturated(np.array([1.0, -1.0]), np.zeros(2))
        assert not is_saturated(np.full(5, 0.5), np.zeros(5))
        assert not is_saturated(np.full(5, 1.0), np.full(5, 1.0))
        assert not is_saturated(np.zeros(0), np.zeros(0))

    def test_default_step_size_is_small(self):
        assert TrainSpec().learning_rate == pytest.approx(0.005)

    def test_empty_training_set(self):
        with pytest.raises(ConfigError):
            train_regressor(np.zeros((0, 4)), np.zeros(0))

    def test_forward_output_bounded(self, params):
        X = np.random.default_rng(0).normal(size=(50, 1024)) * 10.0
        y, _ = forward(params, X)
        assert np.all(np.abs(y) <= 1.0)


class TestModelFile:
    def test_round_trip(self, params, tmp_path):
        path = save_model(params, tmp_path / "models" / "controller.bin")
        restored = load_model(path)
        assert restored.layer_sizes == [1024, 16, 1]
        assert restored.seed == 11
        for name, array in params.arrays().items():
            np.testing.assert_array_equal(getattr(restored, name), array)

    def test_header(self, params, tmp_path):
        path = save_model(params, tmp_path / "controller.bin")
        header = path.read_bytes().split(b"\n", 1)[0].decode()
        assert '"activations": ["tanh", "tanh"]' in header
        assert '"layer_sizes": [1024, 16, 1]' in header

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputError):
            load_model(tmp_path / "nope.bin")

    @pytest.mark.parametrize("content", [b"garbage", b"{}\n", b'{"format": "lanebench-mlp", "layer_sizes": [2, 2, 1]}\n\x00'])
    def test_corrupt_file(self, tmp_path, content):
        path = tmp_path / "bad.bin"
        path.write_bytes(content)
        with pytest.raises(ConfigError):
            load_model(path)


class TestBuildController:
    def test_builds_each_kind(self, params, tmp_path):
        save_model(params, tmp_path / "models" / "controller.bin")
        spec = dict(model_file="models/controller.bin")
        assert isinstance(build_controller(ControllerSpec(kind="oracle")), OracleController)
        assert isinstance(build_controller(ControllerSpec(kind="learned", **spec), tmp_path), LearnedController)
        windowed = build_controller(ControllerSpec(kind="windowed", window=3, **spec), tmp_path)
        assert isinstance(windowed, WindowedController) and windowed.history_window == 3
        biased = build_controller(ControllerSpec(kind="biased", base="oracle", bias=0.05))
        assert isinstance(biased, BiasedController) and not biased.uses_images
        noisy = build_controller(ControllerSpec(kind="noisy", base="learned", noise_sigma=0.1, **spec), tmp_path)
        assert isinstance(noisy, NoisyController) and noisy.uses_images

    def test_learned_without_model(self):
        with pytest.raises(ControllerError):
            build_controller(ControllerSpec(kind="learned"))
