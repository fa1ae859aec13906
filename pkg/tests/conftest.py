import numpy as np
import pytest

from csrchain import ModelParams, optimal_quantity
from csrchain.stationarity import (
    aux_costate_step,
    costate_step,
    manufacturer_foc_residual,
    manufacturer_hamiltonian,
    manufacturer_reaction_residual,
    multiplier_step,
    retailer_foc_residual,
    retailer_hamiltonian,
    supplier_foc_residual,
    supplier_hamiltonian,
    supplier_reaction_im_residual,
    supplier_reaction_ir_residual,
    supplier_reaction_lam_residual,
)


REFERENCE = dict(
    alpha=0.9, beta_s=0.3, beta_m=0.3, beta_r=0.2,
    tau=0.1, theta=0.05,
    delta_s=0.01, delta_m=0.02, delta_r=0.03,
    d=0.1, d_hat=0.1,
    a=10.0, b=1.0, v=2.0, z=12.0, c=1.0,
    x1=1.0, horizon_T=3,
)


@pytest.fixture
def reference_params():
    return ModelParams(**REFERENCE)


def make_params(**overrides):
    values = dict(REFERENCE)
    values.update(overrides)
    return ModelParams(**values)


def draw_params(rng: np.random.Generator, horizon_T: int) -> ModelParams:
    """Random parameter set within the type invariants, tau*theta > 0.

    Ranges keep the linear system well conditioned: the investment scale is
    driven by (1 - tau) / (tau * theta), so tau and theta are bounded away
    from zero, and the social-benefit feedback (delta) is kept moderate.
    """
    a = rng.uniform(5.0, 20.0)
    v = rng.uniform(0.2, 0.9) * a
    return ModelParams(
        alpha=rng.uniform(0.55, 1.0),
        beta_s=rng.uniform(0.1, 0.6),
        beta_m=rng.uniform(0.1, 0.6),
        beta_r=rng.uniform(0.1, 0.6),
        tau=rng.uniform(0.05, 0.5),
        theta=rng.uniform(0.05, 0.25),
        delta_s=rng.uniform(0.0, 0.05),
        delta_m=rng.uniform(0.0, 0.05),
        delta_r=rng.uniform(0.0, 0.05),
        d=rng.uniform(0.0, 0.5),
        d_hat=rng.uniform(0.0, 0.5),
        a=a,
        b=rng.uniform(0.5, 3.0),
        v=v,
        z=rng.uniform(a, 2.0 * a),
        c=rng.uniform(0.0, v),
        x1=rng.uniform(-1.0, 3.0),
        horizon_T=horizon_T,
    )


def random_evaluation_point(rng: np.random.Generator) -> dict:
    """Random arguments for the per-period residual/Hamiltonian functions."""
    return dict(
        x_t=rng.uniform(-2, 2),
        u_t=rng.uniform(-2, 2),
        controls_t=tuple(rng.uniform(-3, 3, size=3)),
        p_r_next=rng.uniform(-2, 2),
        p_m_next=rng.uniform(-2, 2),
        p_s_next=rng.uniform(-2, 2),
        r_next=rng.uniform(-2, 2),
        u_prime_t=rng.uniform(-2, 2),
        w_t=rng.uniform(-2, 2),
        lam_t=rng.uniform(-2, 2),
        lam_prime_t=rng.uniform(-2, 2),
        mu_prime_t=rng.uniform(-2, 2),
        nu_t=rng.uniform(-2, 2),
    )


def gradient_check_worst(params: ModelParams, pt: dict) -> float:
    """Worst relative error between every coded residual function and the
    central finite difference of the corresponding Hamiltonian.

    Covers the three control FOCs, the three costate recursions, the four
    lagrange-block equations, the two forward multiplier steps, and the
    auxiliary costate step.  Relative error uses max(1, |analytic|) as the
    denominator.
    """
    q = optimal_quantity(params)
    h = 1e-5 * (1.0 + max(abs(value) for value in pt["controls_t"]))
    i_s, i_m, i_r = pt["controls_t"]

    def diff(f, x0):
        return (f(x0 + h) - f(x0 - h)) / (2.0 * h)

    ham_r = lambda **kw: retailer_hamiltonian(
        kw.get("x_t", pt["x_t"]),
        (kw.get("i_s", i_s), kw.get("i_m", i_m), kw.get("i_r", i_r)),
        pt["p_r_next"], q, params)
    ham_m = lambda **kw: manufacturer_hamiltonian(
        kw.get("x_t", pt["x_t"]),
        (kw.get("i_s", i_s), kw.get("i_m", i_m), kw.get("i_r", i_r)),
        kw.get("p_m_next", pt["p_m_next"]),
        kw.get("p_r_next", pt["p_r_next"]),
        pt["u_t"], pt["lam_t"], q, params)
    ham_s = lambda **kw: supplier_hamiltonian(
        kw.get("x_t", pt["x_t"]), kw.get("u_t", pt["u_t"]),
        (kw.get("i_s", i_s), kw.get("i_m", i_m), kw.get("i_r", i_r)),
        kw.get("p_s_next", pt["p_s_next"]),
        kw.get("p_m_next", pt["p_m_next"]),
        kw.get("p_r_next", pt["p_r_next"]),
        pt["r_next"], pt["u_prime_t"], pt["w_t"],
        kw.get("lam_t", pt["lam_t"]), pt["lam_prime_t"],
        pt["mu_prime_t"], pt["nu_t"], q, params)

    pairs = [
        (retailer_foc_residual(pt["controls_t"], pt["p_r_next"], params),
         diff(lambda v: ham_r(i_r=v), i_r)),
        (manufacturer_foc_residual(pt["controls_t"], pt["p_m_next"],
                                   pt["lam_t"], params),
         diff(lambda v: ham_m(i_m=v), i_m)),
        (supplier_foc_residual(pt["controls_t"], pt["p_s_next"],
                               pt["lam_prime_t"], pt["mu_prime_t"], params),
         diff(lambda v: ham_s(i_s=v), i_s)),
        (costate_step("R", pt["x_t"], pt["p_r_next"], params),
         diff(lambda v: ham_r(x_t=v), pt["x_t"])),
        (costate_step("M", pt["x_t"], pt["p_m_next"], params,
                      aux_multiplier=pt["u_t"]),
         diff(lambda v: ham_m(x_t=v), pt["x_t"])),
        (costate_step("S", pt["x_t"], pt["p_s_next"], params,
                      aux_multiplier=pt["u_prime_t"],
                      aux_retail_multiplier=pt["w_t"]),
         diff(lambda v: ham_s(x_t=v), pt["x_t"])),
        (manufacturer_reaction_residual(pt["controls_t"], pt["p_m_next"],
                                        pt["lam_t"], params),
         diff(lambda v: ham_m(i_r=v), i_r)),
        (supplier_reaction_im_residual(pt["controls_t"], pt["p_s_next"],
                                       pt["lam_prime_t"], pt["mu_prime_t"],
                                       pt["nu_t"], params),
         diff(lambda v: ham_s(i_m=v), i_m)),
        (supplier_reaction_ir_residual(pt["controls_t"], pt["p_s_next"],
                                       pt["lam_prime_t"], pt["mu_prime_t"],
                                       params),
         diff(lambda v: ham_s(i_r=v), i_r)),
        (supplier_reaction_lam_residual(pt["mu_prime_t"], pt["nu_t"],
                                        pt["r_next"], params),
         diff(lambda v: ham_s(lam_t=v), pt["lam_t"])),
        (multiplier_step("M", pt["u_t"], pt["lam_t"], params),
         diff(lambda v: ham_m(p_r_next=v), pt["p_r_next"])),
        (multiplier_step("S", pt["u_prime_t"], pt["mu_prime_t"], params,
                         lagrange_on_reaction=pt["nu_t"]),
         diff(lambda v: ham_s(p_m_next=v), pt["p_m_next"])),
        (aux_costate_step(pt["r_next"], pt["u_prime_t"], params),
         diff(lambda v: ham_s(u_t=v), pt["u_t"])),
    ]
    return max(abs(analytic - fd) / max(1.0, abs(analytic))
               for analytic, fd in pairs)
