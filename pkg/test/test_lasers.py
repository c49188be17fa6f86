import numpy as np
import pytest

from rydberg_squeezing.lasers import (
    PHASE_CONVENTIONS,
    Laser,
    LaserSet,
    from_angular,
    single_laser_set,
    standard_six_laser_set,
    to_angular,
)


def test_unit_conversion():
    assert to_angular(1.1) == pytest.approx(2 * np.pi * 1.1)
    assert to_angular(1.1, angular_units=True) == 1.1
    assert from_angular(to_angular(50.0)) == pytest.approx(50.0)


def test_laser_attributes():
    laser = Laser("b-r", rabi=0.4, detuning=3.0)
    assert laser.coupling == pytest.approx(0.2)
    assert laser.ground_level == "b"
    assert laser.ladder == "r†b"
    assert Laser.from_coupling("a-r", 0.2, 3.0).rabi == pytest.approx(0.4)
    assert laser.dephased(90).rabi == pytest.approx(0.4j)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(transition="a-b", rabi=1.0, detuning=1.0),
        dict(transition="a-r", rabi=np.nan, detuning=1.0),
        dict(transition="a-r", rabi=1.0, detuning=np.inf),
    ],
)
def test_invalid_laser(kwargs):
    with pytest.raises(ValueError):
        Laser(**kwargs)


def test_empty_laser_set():
    with pytest.raises(ValueError):
        LaserSet(lasers=(), reference_detuning=1.0)


def test_six_laser_set():
    lasers = standard_six_laser_set(10.0, 4.0, 0.5, 0.3, 0.2, phase_convention="++")
    assert [laser.label for laser in lasers] == [
        "pump",
        "stokes_1",
        "stokes_2",
        "mirror_pump",
        "mirror_stokes_1",
        "mirror_stokes_2",
    ]
    assert list(lasers.frame_frequencies()) == pytest.approx([0, -4, 4, -20, -16, -24])
    assert lasers.max_frame_frequency() == pytest.approx(24)
    assert lasers.has_pump
    assert len(lasers.on_transition("b-r")) == 4
    mirror_1, mirror_2 = lasers.lasers[4:]
    assert mirror_1.coupling == pytest.approx(0.3j)
    assert mirror_2.coupling == pytest.approx(0.2j)
    assert lasers.lasers[3].coupling == pytest.approx(0.5)


@pytest.mark.parametrize("convention", sorted(PHASE_CONVENTIONS))
def test_conventions_only_dephase_mirror_stokes(convention):
    lasers = standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, phase_convention=convention)
    reference = standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, phase_convention="00")
    for laser, unshifted in zip(lasers.lasers[:4], reference.lasers[:4]):
        assert laser == unshifted
    for laser, degrees in zip(lasers.lasers[4:], PHASE_CONVENTIONS[convention]):
        assert np.angle(laser.rabi, deg=True) == pytest.approx(degrees)
    assert lasers.phase_convention == convention


def test_six_laser_set_validation():
    with pytest.raises(ValueError):
        standard_six_laser_set(4.0, 4.0, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        standard_six_laser_set(4.0, -1.0, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, phase_convention="+0")


def test_original_three_lasers():
    lasers = standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, include_mirror=False)
    assert len(lasers) == 3
    assert lasers.phase_convention == ""


def test_scaled_and_shifted():
    lasers = single_laser_set(0.5, 10.0)
    assert lasers.scaled(2).lasers[0].coupling == pytest.approx(1.0)
    shifted = lasers.shifted(3.0)
    assert shifted.reference_detuning == 13.0
    assert list(shifted.frame_frequencies()) == [-3.0]
