"""A twisted locally conformal symplectic structure with an exponential
factor, then the transitive classification run backwards on small examples."""

from twisted_jacobi import (
    Chart,
    DiffForm,
    TwistedContactData,
    TwistedLcsData,
    classify_transitive,
    exterior_derivative,
    from_twisted_contact,
    from_twisted_lcs,
    verify_structure,
    wedge,
)
from twisted_jacobi.expr import exp

chart = Chart(("x1", "y1", "x2", "y2"))
x1, y1, x2, y2 = chart.coordinates()
d = [DiffForm.basis(chart, i) for i in range(4)]

# Phi = exp(-x1)(dx1^dy1 + dx2^dy2) satisfies d Phi = -theta ^ Phi for theta = dx1
phi = exp(-x1) * (wedge(d[0], d[1]) + wedge(d[2], d[3]))
theta = d[0]
print("d Phi + theta ^ Phi =", exterior_derivative(phi) + wedge(theta, phi))

omega = x2 * wedge(d[1], d[2])
s = from_twisted_lcs(TwistedLcsData(phi + omega, theta, omega))
print("E =", s.e_field)
print(verify_structure(s).summary())

# the plane: Theta = dx^dy, theta = dx
plane = Chart(("x", "y"))
p = from_twisted_lcs(TwistedLcsData(DiffForm(plane, 2, {(0, 1): 1}), DiffForm.basis(plane, 0), DiffForm.zero(plane, 2)))
c = classify_transitive(p)
print(c.parity, "theta =", c.theta, "Theta =", c.big_theta)

# odd dimension: the classification recovers theta and Theta = d theta + omega
r3 = Chart(("x", "y", "z"))
x, y, z = r3.coordinates()
s3 = from_twisted_contact(TwistedContactData(DiffForm.from_components(r3, [-y, 0, 1]), DiffForm(r3, 2, {(0, 1): x})))
c = classify_transitive(s3)
print(c.parity, "theta =", c.theta, "Theta =", c.big_theta)
print(c.residuals.summary())
