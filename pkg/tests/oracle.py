"""Independent high-precision oracles (mpmath) used only by the tests.

These sum the defining series directly at >= 30 digits of working
precision; nothing here shares code with the package's double-precision
evaluators.
"""

import mpmath as mp

DPS = 40
MAX_TERMS = 1000


def theta1_series(x, T, dps: int = DPS):
    """Direct summation of 2 q^(1/4) sum (-1)^n q^(n(n+1)) sin((2n+1) pi x)."""
    with mp.workdps(dps):
        x = mp.mpc(x)
        q = mp.exp(-mp.pi * T)
        s = mp.mpc(0)
        for n in range(MAX_TERMS):
            term = (-1) ** n * q ** (n * (n + 1)) * mp.sin((2 * n + 1) * mp.pi * x)
            s += term
            if n > 3 and abs(term) < mp.mpf(10) ** (-dps - 10) * (abs(s) + 1):
                break
        return 2 * q ** mp.mpf("0.25") * s


def theta1_logderiv_series(x, T, dps: int = DPS):
    """Termwise-differentiated series ratio theta1'/theta1."""
    with mp.workdps(dps):
        x = mp.mpc(x)
        q = mp.exp(-mp.pi * T)
        num = mp.mpc(0)
        den = mp.mpc(0)
        for n in range(MAX_TERMS):
            c = (-1) ** n * q ** (n * (n + 1))
            k = (2 * n + 1) * mp.pi
            den += c * mp.sin(k * x)
            num += c * k * mp.cos(k * x)
            if n > 3 and abs(c) < mp.mpf(10) ** (-dps - 10):
                break
        return num / den


def halfplane_product(x, zeros, poles, m, T, dps: int = DPS):
    """exp(-2 pi i m x) prod theta1(x - z) / theta1(x - p), unnormalized."""
    with mp.workdps(dps):
        x = mp.mpc(x)
        out = mp.exp(-2j * mp.pi * m * x)
        for z in zeros:
            out *= theta1_series(x - mp.mpc(z), T, dps)
        for p in poles:
            out /= theta1_series(x - mp.mpc(p), T, dps)
        return out


def disc_product(x, zeros, T, dps: int = DPS):
    """prod theta1(x - z) / theta1(x + conj(z))."""
    with mp.workdps(dps):
        x = mp.mpc(x)
        out = mp.mpc(1)
        for z in zeros:
            z = mp.mpc(z)
            out *= theta1_series(x - z, T, dps)
            out /= theta1_series(x + mp.conj(z), T, dps)
        return out


def to_complex(value) -> complex:
    return complex(value)
