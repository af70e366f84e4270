#!/usr/bin/env python3
"""Regenerate every numeric fixture frozen in the test suites.

Each section recomputes one family of golden values on an independent stack
(mpmath arbitrary precision, scipy adaptive quadrature) and prints them next
to the file that freezes them, so any literal in the Rust tests can be
audited or refreshed from here:

    python3 scripts/gen_fixtures.py

The Rust tests pin these values with tolerances between 1e-12 relative
(closed forms) and 2e-6 relative (quadrature-fed turbulence chains), so any
drift beyond the printed digits is a real behavior change, not noise.
"""

import math

import mpmath as mp
from scipy.integrate import quad
from scipy.special import gamma as sp_gamma


def section(title):
    print(f"\n== {title}")


# ---------------------------------------------------------------------------
# Log-gamma ratios: ln(Gamma(x + a) / Gamma(x)).


def log_gamma_ratios():
    section("special.rs: ln_gamma_ratio golden values")
    mp.mp.dps = 50
    for x, a in [
        (1.0, 2.5),
        (2.0, 5.8),
        (17.3, 0.903),
        (1001.5, 1.94),
        (5_000_001.0, 5.8),
        (2e9, 3.1),
    ]:
        v = mp.loggamma(mp.mpf(x) + mp.mpf(a)) - mp.loggamma(mp.mpf(x))
        print(f"  x={x:<12} a={a:<6} -> {mp.nstr(v, 20)}")


# ---------------------------------------------------------------------------
# Refractive-index structure profile and the scintillation model.


def cn2(h, wind, c0):
    return (
        0.00594 * (wind / 27.0) ** 2 * (1e-5 * h) ** 10 * math.exp(-h / 1000.0)
        + 2.7e-16 * math.exp(-h / 1500.0)
        + c0 * math.exp(-h / 100.0)
    )


def scintillation(rytov, d):
    t1 = 0.49 * rytov / (1.0 + 0.65 * d * d + 1.11 * rytov ** 1.2) ** (7.0 / 6.0)
    t2 = (
        0.51
        * rytov
        * (1.0 + 0.69 * rytov ** 1.2) ** (-5.0 / 6.0)
        / (1.0 + 0.90 * d * d + 0.62 * d * d * rytov ** 1.2)
    )
    return math.expm1(t1 + t2)


def profile_points():
    section("turbulence.rs: profile and scintillation reference points")
    print(f"  cn2(10 km, w=65, C0=1.7e-14)       -> {cn2(10_000.0, 65.0, 1.7e-14):.17e}")
    print(f"  Gamma(11/6) (exponential-profile)  -> {sp_gamma(11.0 / 6.0):.17g}")
    print(f"  scintillation_index(1, 0)          -> {scintillation(1.0, 0.0):.17g}")


# ---------------------------------------------------------------------------
# Slant-path turbulence chain: altitude integral -> Rytov variance ->
# aperture parameter -> scintillation index -> fitted shape parameters.

PROFILE_CEILING_M = 100_000.0


def rytov_variance(h0, top, zenith_deg, wind, c0, wavelength):
    top = min(top, PROFILE_CEILING_M)
    k = 2.0 * math.pi / wavelength
    sec = 1.0 / math.cos(math.radians(zenith_deg))
    # split at the profile's bump and knees so the adaptive rule converges
    knots = [h for h in [1e3, 5e3, 1e4, 1.5e4, 2e4, 3e4, 6e4] if h0 < h < top]
    edges = [h0] + knots + [top]
    integral = 0.0
    for lo, hi in zip(edges, edges[1:]):
        part, _ = quad(
            lambda h: cn2(h, wind, c0) * (h - h0) ** (5.0 / 6.0),
            lo,
            hi,
            epsabs=0.0,
            epsrel=1e-12,
            limit=400,
        )
        integral += part
    return 2.25 * k ** (7.0 / 6.0) * sec ** (11.0 / 6.0) * integral


def fit_shapes(sigma_i2):
    gamma_arg = 2.487 * sigma_i2 ** (1.0 / 6.0) - 0.104
    alpha = 7.220 * sigma_i2 ** (1.0 / 3.0) / sp_gamma(gamma_arg)
    beta = 1.012 * (alpha * sigma_i2) ** (-13.0 / 25.0) + 0.142
    return alpha, beta


def chain(label, h0, top, zenith_deg, wind, c0, aperture, wavelength=1550e-9):
    sr2 = rytov_variance(h0, top, zenith_deg, wind, c0, wavelength)
    k = 2.0 * math.pi / wavelength
    length = (top - h0) / math.cos(math.radians(zenith_deg))
    d = math.sqrt(k * aperture * aperture / (4.0 * length))
    si2 = scintillation(sr2, d)
    alpha, beta = fit_shapes(si2)
    print(
        f"  {label:<34} sr2={sr2:.13e} si2={si2:.13e}\n"
        f"  {'':<34} alpha={alpha:.17g} beta={beta:.17g}"
    )


def turbulence_chains():
    section("turbulence.rs + tests: slant-path chain golden values")
    sat = dict(h0=18_000.0, top=500_000.0, wind=65.0, c0=1.7e-14)
    low = dict(h0=200.0, top=20_000.0, c0=1.7e-14)
    chain("high link z=70 aperture=0.4", zenith_deg=70.0, aperture=0.4, **sat)
    chain("high link z=80 aperture=0.4", zenith_deg=80.0, aperture=0.4, **sat)
    chain("high link z=70 aperture=0.2", zenith_deg=70.0, aperture=0.2, **sat)
    chain("high link z=70 aperture=0.0", zenith_deg=70.0, aperture=0.0, **sat)
    chain("low link  z=70 wind=21", zenith_deg=70.0, wind=21.0, aperture=0.0, **low)
    chain("low link  z=80 wind=21", zenith_deg=80.0, wind=21.0, aperture=0.0, **low)
    chain("low link  z=70 wind=30", zenith_deg=70.0, wind=30.0, aperture=0.0, **low)
    chain("low link  z=70 wind=40", zenith_deg=70.0, wind=40.0, aperture=0.0, **low)


# ---------------------------------------------------------------------------
# Attenuation reference points.


def attenuation_points():
    section("attenuation.rs: transmittance reference points")
    length_km = (500_000.0 - 18_000.0) / math.cos(math.radians(80.0)) / 1000.0
    print(f"  slant length 18->500 km at z=80    -> {length_km:.17g} km")
    print(f"  exp(-1e-5 * that length)           -> {math.exp(-1e-5 * length_km):.17g}")
    visibility = 1.002 / (3.128e-4 * 0.025) ** 0.6473
    print(f"  visibility(lwc=3.128e-4, n=0.025)  -> {visibility:.17g} km")
    sigma_g = 3.91 / visibility * (1550.0 / 550.0) ** -1.6
    print(f"  exp(-sigma_g * 1 km) at 1550 nm    -> {math.exp(-sigma_g):.17g}")
    print(
        f"  exp(-0.2 / sin(20 deg))            -> "
        f"{math.exp(-0.2 / math.sin(math.radians(20.0))):.17g}"
    )


# ---------------------------------------------------------------------------
# Outage probability golden values. The closed form being checked sums a
# binomial series; the reference here is arbitrary-precision quadrature of
# the same quantity written as an integral:
#
#   P = alpha * Int_0^1 (1-t)^(alpha-1) * (1 - t^r)^alpha dt,
#   r = (gamma_th * snr_e / snr_d)^(beta/2),  gamma_th = 2^(2*rate).


def outage_reference(alpha, beta, snr_d, snr_e, rate):
    mp.mp.dps = 40
    a = mp.mpf(alpha)
    gamma_th = mp.power(2, 2 * mp.mpf(rate))
    r = mp.power(gamma_th * mp.mpf(snr_e) / mp.mpf(snr_d), mp.mpf(beta) / 2)
    integral = mp.quad(
        lambda t: (1 - t) ** (a - 1) * (1 - mp.power(t, r)) ** a, [0, 1]
    )
    return a * integral


def outage_goldens():
    section("secrecy.rs: outage golden values (40-digit quadrature)")
    cases = [
        (5.0857269433, 0.9066988449, 100.0, 10.0, 0.01),
        (3.0421436600, 2.7789313297, 1.0, math.sqrt(10.0), 0.01),
        (1.9376301804, 6.3369567635, 1e4, math.sqrt(10.0), 0.01),
    ]
    for alpha, beta, snr_d, snr_e, rate in cases:
        v = outage_reference(alpha, beta, snr_d, snr_e, rate)
        print(
            f"  alpha={alpha:<13} beta={beta:<13} snr_d={snr_d:<8g} "
            f"snr_e={snr_e:<18} -> {mp.nstr(v, 17)}"
        )
    balanced = outage_reference(2.5, 1.8, 7.0, 7.0, 0.0)
    print(f"  balanced link, zero rate (any shape) -> {mp.nstr(balanced, 17)}")


if __name__ == "__main__":
    log_gamma_ratios()
    profile_points()
    turbulence_chains()
    attenuation_points()
    outage_goldens()
