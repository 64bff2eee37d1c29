import pytest
import torch

from helpers import make_gen
from zsiis import (DimensionError, dwt, iwt, loss_crev, loss_freq,
                   loss_hiding, loss_srev, loss_total)


def test_mse_losses_zero_on_identical_inputs():
    x = torch.rand(3, 8, 8, generator=make_gen(0))
    for fn in (loss_hiding, loss_srev, loss_crev):
        assert float(fn(x, x)) == 0.0
    assert float(loss_freq(x, x)) == 0.0


def test_uniform_difference_values():
    base = torch.rand(3, 4, 4, generator=make_gen(1))
    assert float(loss_hiding(base + 0.1, base)) == pytest.approx(0.01, rel=1e-4)
    assert float(loss_srev(base + 0.2, base)) == pytest.approx(0.04, rel=1e-4)
    assert float(loss_crev(base, base + 0.2)) == pytest.approx(0.04, rel=1e-4)


def test_losses_nonnegative_and_symmetric():
    gen = make_gen(2)
    a = torch.rand(3, 8, 8, generator=gen)
    b = torch.rand(3, 8, 8, generator=gen)
    for fn in (loss_hiding, loss_freq, loss_srev, loss_crev):
        assert float(fn(a, b)) >= 0.0
        assert float(fn(a, b)) == pytest.approx(float(fn(b, a)))


def test_freq_loss_blind_to_pure_hh_perturbation():
    # build a perturbation living entirely in the HH band, so the
    # low-frequency comparison cannot see it
    cover = torch.rand(3, 8, 8, generator=make_gen(3), dtype=torch.float64)
    sub = torch.zeros(12, 4, 4, dtype=torch.float64)
    sub[9:12] = 0.3 * torch.randn(3, 4, 4, generator=make_gen(4), dtype=torch.float64)
    stego = cover + iwt(sub)
    assert float(loss_freq(stego, cover)) < 1e-20
    assert float(loss_hiding(stego, cover)) > 1e-4  # the pixels did change


def test_freq_loss_constant_shift_gain():
    # constant shift v lands in LL with gain 2, so the loss is (2v)^2
    cover = torch.rand(3, 8, 8, generator=make_gen(5), dtype=torch.float64)
    stego = cover + 0.1
    ll_diff = dwt(stego) - dwt(cover)
    assert torch.allclose(ll_diff[:3], torch.full_like(ll_diff[:3], 0.2))
    assert float(loss_freq(stego, cover)) == pytest.approx(0.04, rel=1e-9)


def test_loss_total_weighted_sum():
    assert float(loss_total((1.0, 2.0, 3.0, 4.0), (1.0, 10.0, 5.0, 5.0))) == 56.0
    assert float(loss_total((0.0, 0.0, 0.0, 0.0), (1.0, 10.0, 5.0, 5.0))) == 0.0
    assert float(loss_total((9.0, 9.0, 9.0, 9.0), (0.0, 0.0, 0.0, 0.0))) == 0.0


def test_loss_total_linear_in_each_term():
    weights = (1.0, 10.0, 5.0, 5.0)
    base = (0.5, 0.25, 2.0, 1.5)
    for i, w in enumerate(weights):
        bumped = list(base)
        bumped[i] += 1.0
        delta = float(loss_total(tuple(bumped), weights)) - float(loss_total(base, weights))
        assert delta == pytest.approx(w, rel=1e-6)


def test_loss_total_arity_checked():
    with pytest.raises(ValueError):
        loss_total((1.0, 2.0), (1.0, 2.0))


def test_shape_mismatch_rejected():
    with pytest.raises(DimensionError):
        loss_hiding(torch.zeros(1, 2, 2), torch.zeros(1, 2, 4))
    with pytest.raises(DimensionError):
        loss_freq(torch.zeros(1, 4, 4), torch.zeros(1, 4, 6))
