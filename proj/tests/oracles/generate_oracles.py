"""Reference values frozen into the C++ tests.

Everything here is computed with mpmath at 50 significant digits, by
brute-force series or textbook identities, independently of the C++ code.
Run: python3 generate_oracles.py
"""
import mpmath as mp

mp.mp.dps = 50


def show(name, value):
    print(f"{name} = {mp.nstr(value, 20)}")


# Special functions.
for x in ["1e-6", "0.001", "0.22", "0.5", "0.57", "0.9", "0.999", "1.001", "1.25",
          "1.4616", "1.5", "1.999", "2.001", "2.5", "3.7", "7.3", "9.99", "12.5",
          "150.25", "1e4", "1e8"]:
    xv = mp.mpf(x)
    print(f"{{{x}, {mp.nstr(mp.loggamma(xv), 20)}, {mp.nstr(mp.digamma(xv), 20)}, "
          f"{mp.nstr(mp.polygamma(1, xv), 20)}}},")

show("log_beta(0.5,4.5)", mp.log(mp.beta(mp.mpf("0.5"), mp.mpf("4.5"))))
for s, x in [("0.5", "0"), ("1", "0.78"), ("1.5", "0.78"), ("4.5", "2.915"),
             ("1", "0.505"), ("3", "12.08"), ("3.5", "13.94"), ("0.25", "3"),
             ("50", "45"), ("10", "0.1"), ("2.5", "40")]:
    print(f"Q({s},{x}) = {mp.nstr(mp.gammainc(mp.mpf(s), mp.mpf(x), mp.inf, regularized=True), 20)}")


def lterm(r, nu, p, k):
    return nu * (mp.loggamma(r + k) - mp.loggamma(k + 1) - mp.loggamma(r)) + k * mp.log(p) + r * mp.log(1 - p)


def log_c(r, nu, p, terms=10000):
    return mp.log(mp.fsum(mp.exp(lterm(r, nu, p, k)) for k in range(terms)))


r, nu, p = mp.mpf("0.5"), mp.mpf(2), mp.mpf("0.3")
lc = log_c(r, nu, p)
show("logC(0.5,2,0.3)", lc)
show("log_pmf CMNB(0.5,2,0.3) k=2", lterm(r, nu, p, 2) - lc)
show("pmf ratio (0.57,3.06,0.35) k=2", mp.mpf("0.35") * ((1 + mp.mpf("0.57")) / 2) ** mp.mpf("3.06"))

# Conditional of two CMNBs given their sum, by exhaustive convolution.
rx, ry, nu, p, s = mp.mpf("0.8"), mp.mpf("1.5"), mp.mpf(2), mp.mpf("0.4"), 5
lcx, lcy = log_c(rx, nu, p), log_c(ry, nu, p)
joint = [mp.exp(lterm(rx, nu, p, k) - lcx + lterm(ry, nu, p, s - k) - lcy) for k in range(s + 1)]
tot = mp.fsum(joint)
print("conditional(0.8,1.5,2,0.4,s=5) =", [mp.nstr(j / tot, 20) for j in joint])

# Dispersion delta by partial sums with an Euler-Maclaurin tail.
def delta(r, nu, k):
    return (1 - nu) * mp.polygamma(1, k + 1) + nu * mp.polygamma(1, k + r)
show("Delta_0(r=3,nu=4)", delta(mp.mpf(3), mp.mpf(4), 0))

# Willmot log-likelihood at the published CMNB parameters.
W = [3719, 232, 38, 7, 3, 1]
r, nu, p = mp.mpf("0.57"), mp.mpf("3.06"), mp.mpf("0.35")
lc = log_c(r, nu, p, 4000)
show("loglik Willmot (0.57,3.06,0.35)", mp.fsum(n * (lterm(r, nu, p, k) - lc) for k, n in enumerate(W)))
C = [27141, 5789, 1443, 457, 155, 56, 27, 2, 1, 1]
r, nu, p = mp.mpf("0.95"), mp.mpf("10.40"), mp.mpf("0.36")
lc = log_c(r, nu, p, 4000)
show("loglik car (0.95,10.40,0.36)", mp.fsum(n * (lterm(r, nu, p, k) - lc) for k, n in enumerate(C)))

# Renyi identity: sum of NB(r, pt)^nu equals the p-tilde normalizer.
r, nu, pt = mp.mpf("0.8"), mp.mpf(2), mp.mpf("0.4")
s = mp.fsum(mp.exp(nu * lterm(r, 1, pt, k)) for k in range(3000))
show("sum NB(0.8,0.4)^2", s)

# Coefficients baked into src/special_fn.cpp (reproduced here for audit).
print("zeta(k)-1, k=2..31:")
for k in range(2, 32):
    print(f"    {mp.nstr(mp.zeta(k) - 1, 20)},")
x0 = mp.findroot(mp.digamma, mp.mpf("1.46"))
hi = float(x0)
print("digamma root hi/lo:", repr(hi), repr(float(x0 - mp.mpf(hi))))
print("Taylor coefficients of digamma at its root, k=1..22:")
for k in range(1, 23):
    print(f"    {mp.nstr(mp.polygamma(k, x0) / mp.factorial(k), 20)},")
