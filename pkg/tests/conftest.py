import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from twisted_jacobi.expr import Chart, parse
from twisted_jacobi.jacobi import TwistedJacobiStructure
from twisted_jacobi.multivec import DiffForm, Multivector
from twisted_jacobi.structures import (
    TwistedContactData,
    TwistedLcsData,
    from_twisted_contact,
    from_twisted_lcs,
    product_with_line,
)

R3 = Chart(("x", "y", "z"))
R2 = Chart(("x", "y"))


def form(chart, degree, comps):
    return DiffForm(chart, degree, {k: parse(v, chart) for k, v in comps.items()})


def multivector(chart, degree, comps):
    return Multivector(chart, degree, {k: parse(v, chart) for k, v in comps.items()})


def contact_theta(chart=R3):
    return form(chart, 1, {(0,): "-y", (2,): "1"})


def make_contact():
    return from_twisted_contact(TwistedContactData(contact_theta(), DiffForm.zero(R3, 2)))


def make_twisted_contact():
    return from_twisted_contact(TwistedContactData(contact_theta(), form(R3, 2, {(0, 1): "x"})))


def make_lcs2():
    return from_twisted_lcs(TwistedLcsData(form(R2, 2, {(0, 1): "1"}), form(R2, 1, {(0,): "1"}), DiffForm.zero(R2, 2)))


def make_product():
    return product_with_line(make_contact(), "w")


@pytest.fixture(scope="session")
def contact():
    return make_contact()


@pytest.fixture(scope="session")
def twisted_contact():
    return make_twisted_contact()


@pytest.fixture(scope="session")
def lcs2():
    return make_lcs2()


@pytest.fixture(scope="session")
def product():
    return make_product()


@pytest.fixture(scope="session")
def bad_structure():
    return TwistedJacobiStructure(R3, multivector(R3, 2, {(0, 1): "1"}), Multivector.basis(R3, 2), DiffForm.zero(R3, 2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
