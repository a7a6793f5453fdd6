import numpy as np
import pytest

from rebalance import da_smote, deep_smote
from rebalance.da_smote import (
    AdversarialConfig,
    discriminator_specs,
    discriminator_step,
    generator_specs,
    generator_step,
    latent_capacity,
    noise_latent,
    oversample_da_smote,
    oversample_gan,
    pair_latent,
    train_adversarial,
    train_da_smote,
    train_gan_baseline,
)
from rebalance.errors import ConfigError, InputError, InsufficientMinorityError
from rebalance.nn_core import Sgd, bce_terms, clamp_probability, mlp_forward, mlp_init
from rebalance.pairs import candidate_pairs
from rebalance.samplers import fit_sampler


def _config(gen, disc, iterations=20, **kw):
    return AdversarialConfig(
        iterations=iterations,
        gen_arch=generator_specs(gen),
        disc_arch=discriminator_specs(disc),
        **kw,
    )


@pytest.fixture
def minority(rng):
    raw = rng.normal(size=(60, 2))
    return (raw - raw.min(axis=0)) / (raw.max(axis=0) - raw.min(axis=0))


class TestCapacity:
    @pytest.mark.parametrize("w,expected", [(2, 1), (5, 10), (268, 35778)])
    def test_values(self, w, expected):
        assert latent_capacity(w) == expected

    def test_domain(self):
        with pytest.raises(InputError):
            latent_capacity(1)


class TestConfig:
    def test_wbc_architectures(self):
        cfg = _config([18, 64, 48, 24, 12, 9], [9, 4, 2, 1])
        cfg.check_widths(feature_dim_n=9, latent_width=18)
        assert cfg.gen_arch[-1].activation == "linear"
        assert cfg.disc_arch[-1].activation == "sigmoid"
        assert cfg.disc_arch[0].activation == "leaky_relu"

    def test_generator_output_must_match_features(self):
        cfg = _config([4, 8, 3], [2, 4, 1])
        with pytest.raises(ConfigError):
            cfg.check_widths(feature_dim_n=2, latent_width=4)

    def test_discriminator_emits_one_value(self):
        cfg = _config([4, 8, 2], [2, 4, 2])
        with pytest.raises(ConfigError):
            cfg.check_widths(feature_dim_n=2, latent_width=4)

    @pytest.mark.parametrize("kw", [{"gen_loss_mode": "wasserstein"}, {"label_smoothing": 0.5}, {"disc_steps_k": 0}])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            _config([4, 2], [2, 1], **kw)


class TestSteps:
    def test_discriminator_step_ascends(self, rng):
        D = mlp_init(discriminator_specs([2, 8, 1]), seed=3)
        real = rng.random((32, 2))
        fake = rng.random((32, 2)) * 0.5
        before = discriminator_step(D, Sgd(1e-4), real, fake)
        after = bce_terms(mlp_forward(D, real), mlp_forward(D, fake))[0]
        assert after >= before

    def test_generator_step_reports_objective(self, rng):
        G = mlp_init(generator_specs([4, 8, 2]), seed=1)
        D = mlp_init(discriminator_specs([2, 8, 1]), seed=2)
        latent = rng.random((16, 4))
        p = clamp_probability(mlp_forward(D, mlp_forward(G, latent)))
        assert generator_step(G, D, Sgd(1e-3), latent, "saturating") == pytest.approx(np.mean(np.log1p(-p)))

    def test_generator_step_leaves_discriminator_alone(self, rng):
        G = mlp_init(generator_specs([4, 8, 2]), seed=1)
        D = mlp_init(discriminator_specs([2, 8, 1]), seed=2)
        frozen = [p.copy() for p in D.parameters()]
        generator_step(G, D, Sgd(1e-2), rng.random((16, 4)), "non_saturating")
        for p, q in zip(frozen, D.parameters()):
            np.testing.assert_array_equal(p, q)


class TestTraining:
    def test_smoke_discriminator_stays_unsure(self, minority):
        cfg = _config([4, 16, 2], [2, 8, 1], iterations=2000, rng_seed=1)
        run = train_adversarial(minority, cfg, pair_latent(minority))
        synthetic = oversample_da_smote(minority, run.generator, 200, rng_seed=0)[60:]
        assert np.all(np.isfinite(synthetic))
        score = float(np.mean(mlp_forward(run.discriminator, synthetic)))
        assert 0.2 <= score <= 0.8

    def test_bitwise_reproducible(self, minority):
        cfg = _config([4, 8, 2], [2, 4, 1], iterations=30, rng_seed=5)
        a = train_da_smote(minority, cfg)
        b = train_da_smote(minority, cfg)
        for p, q in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(p, q)

    @pytest.mark.parametrize("mode", ["saturating", "non_saturating"])
    def test_both_generator_losses_run(self, minority, mode):
        cfg = _config([4, 8, 2], [2, 4, 1], iterations=50, gen_loss_mode=mode)
        run = train_adversarial(minority, cfg, pair_latent(minority))
        assert len(run.history) == 50
        assert all(np.isfinite(h["disc_objective"]) and np.isfinite(h["gen_objective"]) for h in run.history)

    def test_generator_input_must_be_pair_width(self, minority):
        with pytest.raises(ConfigError):
            train_da_smote(minority, _config([3, 8, 2], [2, 4, 1]))

    def test_needs_two_rows(self):
        with pytest.raises(InsufficientMinorityError):
            train_da_smote(np.zeros((1, 2)), _config([4, 2], [2, 1]))


class TestSharedLoop:
    """DA-SMOTE and the GAN differ only in what the latent sampler draws."""

    @staticmethod
    def _recording(sampler, calls):
        def draw(rng, m):
            out = sampler(rng, m)
            calls.append(out)
            return out

        return draw

    def test_pair_sampler_feeds_concatenated_rows(self, minority):
        calls = []
        cfg = _config([4, 8, 2], [2, 4, 1], iterations=5, disc_steps_k=2, minibatch_m=8)
        train_adversarial(minority, cfg, self._recording(pair_latent(minority), calls))
        assert len(calls) == 5 * (2 + 1)
        rows = {tuple(r) for r in minority.tolist()}
        for batch in calls:
            assert batch.shape == (8, 4)
            for r in batch:
                assert tuple(r[:2]) in rows and tuple(r[2:]) in rows
                assert tuple(r[:2]) != tuple(r[2:])

    def test_noise_sampler_feeds_uniform_noise(self, minority):
        calls = []
        cfg = _config([3, 8, 2], [2, 4, 1], iterations=5, minibatch_m=8)
        train_adversarial(minority, cfg, self._recording(noise_latent(3), calls))
        assert len(calls) == 5 * 2
        assert all(b.shape == (8, 3) and np.all(np.abs(b) <= 1.0) for b in calls)

    def test_gan_baseline_wbc_architecture(self, rng):
        X = rng.random((30, 9))
        cfg = _config([9, 36, 18, 9], [9, 20, 8, 1], iterations=3)
        generator = train_gan_baseline(X, cfg, noise_dim=9)
        assert generator.widths == [9, 36, 18, 9]
        with pytest.raises(ConfigError):
            train_gan_baseline(X, cfg, noise_dim=5)


class TestOversample:
    def test_wbc_width_and_determinism(self, rng):
        X = rng.random((30, 9))
        generator = mlp_init(generator_specs([18, 64, 48, 24, 12, 9]), seed=0)
        a = oversample_da_smote(X, generator, 20, rng_seed=1)
        b = oversample_da_smote(X, generator, 20, rng_seed=1)
        assert a.shape == (50, 9)
        np.testing.assert_array_equal(a, b)

    def test_zero_deficit(self, minority):
        generator = mlp_init(generator_specs([4, 8, 2]), seed=0)
        np.testing.assert_array_equal(oversample_da_smote(minority, generator, 0, rng_seed=0), minority)
        gan = mlp_init(generator_specs([3, 8, 2]), seed=0)
        np.testing.assert_array_equal(oversample_gan(minority, gan, 0, rng_seed=0), minority)

    def test_gan_output_width(self, minority):
        gan = mlp_init(generator_specs([5, 8, 2]), seed=0)
        assert oversample_gan(minority, gan, 17, rng_seed=2).shape == (77, 2)


def test_neighborhood_pairs_reach_synthesis(minority, monkeypatch):
    seen = {"train": [], "synthesis": []}

    def recorder(stage, real):
        def recording(candidates, t_count, rng):
            seen[stage].append({tuple(sorted(p)) for p in candidates.tolist()})
            return real(candidates, t_count, rng)
        return recording

    monkeypatch.setattr(da_smote, "sample_pairs", recorder("train", da_smote.sample_pairs))
    monkeypatch.setattr(deep_smote, "sample_pairs", recorder("synthesis", deep_smote.sample_pairs))
    settings = {
        "iterations": 3, "gen_arch": [4, 8, 2], "disc_arch": [2, 4, 1], "disc_steps_k": 1,
        "minibatch_m": 8, "gen_loss_mode": "non_saturating", "gen_learning_rate": 2e-4,
        "disc_learning_rate": 2e-4, "optimizer": "adam", "neighborhood_k": 3,
    }
    sampler = fit_sampler("da_smote", minority, minority + 1.0, settings, seed=5)
    assert sampler.sample(12, 1).shape == (12, 2)

    edges = {tuple(p) for p in candidate_pairs(minority, 3).tolist()}
    assert seen["train"] and all(s == edges for s in seen["train"])
    assert seen["synthesis"] == [edges]
