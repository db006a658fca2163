"""Twisted contact structure on R^3: build it, verify it, and watch the
Jacobi identity fail by exactly the twisting term."""

from twisted_jacobi import Chart, DiffForm, TwistedContactData, bracket_fun, from_twisted_contact, jacobiator_check, verify_structure

chart = Chart(("x", "y", "z"))
x, y, z = chart.coordinates()

# theta = dz - y dx is the standard contact form; omega twists it
theta = DiffForm.from_components(chart, [-y, 0, 1])
omega = DiffForm(chart, 2, {(0, 1): x})

s = from_twisted_contact(TwistedContactData(theta, omega))
print("Lambda =", s.lam)
print("E      =", s.e_field)
print("domain constraints:", [str(c) for c in s.chart.domain_constraints])
print(verify_structure(s).summary())

# the bracket {f, g} = Lambda(df, dg) + <f dg - g df, E>
for f, g in [(x, y), (x, z), (y, z)]:
    print(f"{{{f}, {g}}} =", bracket_fun(s, f, g))

# cyclic sum of nested brackets against the (d omega, omega) term
r = jacobiator_check(s, x, y, z)
print("Jacobiator:", r.lhs, "  twisting term:", r.rhs, "  residual:", r.status)

# without omega the ordinary Jacobi identity comes back
plain = from_twisted_contact(TwistedContactData(theta, DiffForm.zero(chart, 2)))
r = jacobiator_check(plain, x * y, z ** 2, x + z)
print("untwisted Jacobiator:", r.lhs, r.rhs)
