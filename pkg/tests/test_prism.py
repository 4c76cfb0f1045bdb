import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from convexcap.errors import HeightExceedsLength, NoSuchPrism
from convexcap.prism import Degeneracy, PrismSpec, prism_angles, project_length, rho

SQRT2, SQRT3 = math.sqrt(2), math.sqrt(3)


def explicit_prism(lengths, heights):
    """Upper vertices of the prism in 3D, built from the projected triangle by
    coordinates alone (law of cosines, no gradients)."""
    proj = [math.sqrt(lengths[s] ** 2 - (heights[(s + 1) % 3] - heights[(s + 2) % 3]) ** 2) for s in range(3)]
    p0 = np.array([0.0, 0.0])
    p1 = np.array([proj[2], 0.0])
    cos0 = (proj[1] ** 2 + proj[2] ** 2 - proj[0] ** 2) / (2 * proj[1] * proj[2])
    p2 = proj[1] * np.array([cos0, math.sqrt(max(0.0, 1 - cos0 * cos0))])
    return [np.array([*p, h]) for p, h in zip((p0, p1, p2), heights)]


def normal_oracle(lengths, heights):
    """Dihedral angles from face normals: alpha at each upper edge, omega at
    each vertical edge."""
    P = explicit_prism(lengths, heights)
    up = np.cross(P[1] - P[0], P[2] - P[0])
    up /= np.linalg.norm(up)  # outward normal of the upper base (points up)
    lateral = []
    for s in range(3):
        a, b = P[(s + 1) % 3], P[(s + 2) % 3]
        d = (b - a)[:2]
        n = np.array([d[1], -d[0], 0.0])  # right of a->b: outside a ccw triangle
        lateral.append(n / np.linalg.norm(n))
    alpha = [math.pi - math.acos(np.clip(up @ lateral[s], -1, 1)) for s in range(3)]
    omega = []
    for a in range(3):
        n1, n2 = lateral[(a + 1) % 3], lateral[(a + 2) % 3]
        omega.append(math.pi - math.acos(np.clip(n1 @ n2, -1, 1)))
    return np.array(alpha), np.array(omega)


@st.composite
def nondegenerate_specs(draw):
    lengths = [draw(st.floats(0.5, 2.0)) for _ in range(3)]
    a, b, c = sorted(lengths)
    assume(a + b > c * 1.05)
    heights = [draw(st.floats(0.0, 1.0)) for _ in range(3)]
    spec = PrismSpec(tuple(lengths), tuple(heights))
    try:
        pa = prism_angles(spec)
    except NoSuchPrism:
        assume(False)
    assume(pa.slope < 0.95)
    return spec


class TestProjectLength:
    def test_examples(self):
        assert project_length(5, 3, 0) == pytest.approx(4.0, abs=1e-15)
        assert project_length(1.7, 0.4, 0.4) == 1.7
        assert project_length(SQRT2, 1, 0) == pytest.approx(1.0, abs=1e-15)

    def test_height_exceeds_length(self):
        with pytest.raises(HeightExceedsLength):
            project_length(1.0, 2.0, 0.0)


class TestRho:
    def test_examples(self):
        assert rho(2.0, 0.3, 0.3) == pytest.approx(math.pi / 2, abs=1e-15)
        assert rho(SQRT3, 1, 0) == pytest.approx(math.acos(1 / SQRT3), abs=1e-15)
        assert rho(SQRT3, 1, 0) == pytest.approx(0.955317, abs=1e-6)
        assert rho(1.5, 0.0, 1.5) == pytest.approx(math.pi, abs=1e-15)

    def test_height_exceeds_length(self):
        with pytest.raises(HeightExceedsLength):
            rho(1.0, 0.0, 1.5)

    @given(ell=st.floats(0.01, 10), t=st.floats(-1, 1), base=st.floats(0, 5))
    def test_supplementary(self, ell, t, base):
        dh = 0.999 * t * ell
        ha, hb = base + max(0.0, dh), base + max(0.0, -dh)
        assert rho(ell, ha, hb) + rho(ell, hb, ha) == pytest.approx(math.pi, abs=1e-12)


class TestPrismAngles:
    def test_pyramid_lateral_prism(self):
        pa = prism_angles(PrismSpec((2.0, SQRT3, SQRT3), (1.0, 0.0, 0.0)))
        assert pa.degeneracy is Degeneracy.NON_DEGENERATE
        assert pa.omega[0] == pytest.approx(math.pi / 2, abs=1e-12)
        assert pa.rho[0, 1] == pytest.approx(math.acos(1 / SQRT3), abs=1e-12)
        assert pa.rho[0, 2] == pytest.approx(math.acos(1 / SQRT3), abs=1e-12)
        assert pa.eta[0] == pytest.approx(math.pi / 4, abs=1e-12)

    def test_right_prism(self):
        lengths = (1.3, 1.1, 0.9)
        pa = prism_angles(PrismSpec(lengths, (0.7, 0.7, 0.7)))
        np.testing.assert_allclose(pa.alpha, math.pi / 2, atol=1e-15)
        from convexcap._geom import corner_angles

        np.testing.assert_allclose(pa.omega, corner_angles(lengths), atol=1e-15)

    def test_flat_prism(self):
        pa = prism_angles(PrismSpec((1.0, 1.0, 1.0), (0.0, 0.0, 0.0)))
        assert pa.degeneracy is Degeneracy.NON_DEGENERATE
        np.testing.assert_allclose(pa.eta, 0.0, atol=1e-15)

    def test_wall_wedge_wall(self):
        pa = prism_angles(PrismSpec((2.0, SQRT2, SQRT2), (1.0, 0.0, 0.0)))
        assert pa.degeneracy is Degeneracy.TYPE_A
        np.testing.assert_allclose(pa.projected, [2.0, 1.0, 1.0], atol=1e-15)
        assert sorted(pa.omega) == pytest.approx([0, 0, math.pi], abs=1e-7)

    def test_type_b_and_c(self):
        # middle vertex below the chord: a vertical V
        b = prism_angles(PrismSpec((2.0, SQRT2, SQRT2), (0.0, 1.0, 1.0)))
        assert b.degeneracy is Degeneracy.TYPE_B
        # a vertical upper edge: corner 0 straight above corner 1
        c = prism_angles(PrismSpec((1.0, SQRT2, 1.0), (1.0, 0.0, 0.0)))
        assert c.degeneracy is Degeneracy.TYPE_C

    def test_no_such_prism(self):
        with pytest.raises(NoSuchPrism):
            prism_angles(PrismSpec((1.0, 1.0, 1.0), (2.0, 0.0, 0.0)))
        with pytest.raises(NoSuchPrism):
            prism_angles(PrismSpec((1.0, 1.0, 3.0), (0.0, 0.0, 0.0)))
        with pytest.raises(NoSuchPrism):
            prism_angles(PrismSpec((1.0, 1.0, 1.0), (-0.1, 0.0, 0.0)))

    @settings(max_examples=200)
    @given(spec=nondegenerate_specs())
    def test_against_normal_oracle(self, spec):
        pa = prism_angles(spec)
        alpha, omega = normal_oracle(spec.lengths, spec.heights)
        np.testing.assert_allclose(pa.alpha, alpha, atol=1e-9)
        np.testing.assert_allclose(pa.omega, omega, atol=1e-9)
        assert np.all((0 < pa.alpha) & (pa.alpha < math.pi))

    @settings(max_examples=100)
    @given(spec=nondegenerate_specs())
    def test_rho_supplementary_and_ranges(self, spec):
        pa = prism_angles(spec)
        for a in range(3):
            for b in range(3):
                if a != b:
                    assert pa.rho[a, b] + pa.rho[b, a] == pytest.approx(math.pi, abs=1e-12)
        for arr in (pa.alpha, pa.omega, pa.rho):
            assert np.all((arr >= 0) & (arr <= math.pi))
        assert sum(pa.omega) == pytest.approx(math.pi, abs=1e-12)

    @settings(max_examples=100)
    @given(spec=nondegenerate_specs(), direction=st.lists(st.floats(-1, 1), min_size=3, max_size=3),
           eps=st.sampled_from([1e-4, 3e-5, 1e-5]))
    def test_schlaefli(self, spec, direction, eps):
        dh = np.array(direction)
        assume(np.linalg.norm(dh) > 0.1)
        dh *= eps / np.linalg.norm(dh)
        h0 = np.array(spec.heights)
        assume(np.all(h0 + dh >= 0))
        p0 = prism_angles(spec)
        p1 = prism_angles(PrismSpec(spec.lengths, tuple(h0 + dh)))
        # upper edges carry alpha, vertical edges omega; base edges stay at pi/2
        total = sum(spec.lengths[s] * (p1.alpha[s] - p0.alpha[s]) for s in range(3))
        total += sum(h0[a] * (p1.omega[a] - p0.omega[a]) for a in range(3))
        assert abs(total) <= 50 * eps * eps

    def test_heights_flattening(self):
        lengths = (1.2, 1.0, 0.9)
        base = np.array([0.0, 0.5, 0.2])
        errs = []
        for t in (1.0, 0.1, 0.01, 0.001):
            pa = prism_angles(PrismSpec(lengths, tuple(t * base)))
            errs.append(np.max(np.abs(pa.alpha - math.pi / 2)))
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 1e-3
