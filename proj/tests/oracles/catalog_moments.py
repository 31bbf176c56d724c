"""Closed-form / high-precision moments for the integrand catalog.

Run with python3; the printed values are frozen into include/geonet/catalog.hpp
and the catalog unit test.
"""
import sympy as sp
import mpmath as mp

mp.mp.dps = 30
x, y, x2, y2 = sp.symbols("x y x2 y2", real=True)
r, th, ph = sp.symbols("r theta phi", positive=True)


def tri_mean(expr):
    # uniform on {x,y >= 0, x + y <= 1}, area 1/2
    return sp.simplify(2 * sp.integrate(sp.integrate(expr, (y, 0, 1 - x)), (x, 0, 1)))


def report(name, mu, second):
    var = second - mu**2
    print(f"{name}: mu={sp.N(mu, 20)} var={sp.N(var, 20)}")


# interval
report("interval_exp", sp.E - 1, sp.integrate(sp.exp(2 * x), (x, 0, 1)))
report("interval_linear", sp.Rational(1, 2), sp.Rational(1, 3))
report("interval_step", sp.Rational(1, 3), sp.Rational(1, 3))
report("square_product", sp.Rational(1, 4), sp.Rational(1, 9))

# triangle
g = sp.exp(x + y / 2)
mu = tri_mean(g)
report("triangle_smooth", mu, tri_mean(g**2))
p = sp.Rational(36, 100)
report("triangle_indicator", p, p)

# cusp |x|^{-1/2} at vertex (0,0): polar with R(theta) = 1/(cos+sin)
R = lambda t: 1 / (mp.cos(t) + mp.sin(t))
mu_c = 2 * mp.quad(lambda t: R(t) ** 1.5 / 1.5, [0, mp.pi / 2])
m2_c = 2 * mp.quad(lambda t: R(t), [0, mp.pi / 2])
print(f"triangle_cusp: mu={mp.nstr(mu_c, 20)} var={mp.nstr(m2_c - mu_c**2, 20)}")

# disk (unit, area pi)
def disk_mean(expr):
    e = expr.subs({x: r * sp.cos(th), y: r * sp.sin(th)}) * r
    return sp.simplify(sp.integrate(sp.integrate(e, (r, 0, 1)), (th, 0, 2 * sp.pi)) / sp.pi)

g = x**2 + y
report("disk_smooth", disk_mean(g), disk_mean(g**2))
pd = (mp.acos(0.3) - 0.3 * mp.sqrt(1 - 0.09)) / mp.pi
print(f"disk_indicator: mu={mp.nstr(pd, 20)} var={mp.nstr(pd * (1 - pd), 20)}")

# sphere octant, area pi/2
def oct_mean(expr):
    e = expr.subs({x: sp.sin(ph) * sp.cos(th), y: sp.sin(ph) * sp.sin(th), sp.Symbol("z", real=True): sp.cos(ph)})
    return sp.simplify(sp.integrate(sp.integrate(e * sp.sin(ph), (ph, 0, sp.pi / 2)), (th, 0, sp.pi / 2)) / (sp.pi / 2))

z = sp.Symbol("z", real=True)
g = z**2 + x * y
report("octant_smooth", oct_mean(g), oct_mean(g**2))

# product of triangles: exp(x1 + y1/2) * (1 + x2*y2)
g1 = sp.exp(x + y / 2)
g2 = 1 + x * y
m1, m2 = tri_mean(g1), tri_mean(g2)
s1, s2 = tri_mean(g1**2), tri_mean(g2**2)
report("triangle_pair_smooth", m1 * m2, s1 * s2)
