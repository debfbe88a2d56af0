import math
import random

import pytest

from boxaudit.dataset_io import ImageInfo
from boxaudit.errors import InvalidSpecError
from boxaudit.geometry import BBox
from boxaudit.noise_injection import (
    NoiseKind,
    NoiseSpec,
    displace_box,
    inject,
    replay,
    rescale_box,
)

from conftest import original_box, simple_dataset

IMG = ImageInfo(id=1, width=100, height=100, file_name="a.jpg")


def _base_dataset(n=20, seed=9):
    rng = random.Random(seed)
    anns = []
    for i in range(1, n + 1):
        image_id = rng.randint(1, 4)
        anns.append(
            original_box(
                i, image_id, rng.randint(1, 3),
                rng.uniform(50, 800), rng.uniform(50, 800),
                rng.uniform(10, 80), rng.uniform(10, 80),
            )
        )
    return simple_dataset(anns)


# --- spec validation -----------------------------------------------------------


def test_location_without_amplitude_rejected():
    with pytest.raises(InvalidSpecError):
        NoiseSpec(kind=NoiseKind.LOCATION, fraction=0.2)


def test_scale_without_amplitude_rejected():
    with pytest.raises(InvalidSpecError):
        NoiseSpec(kind=NoiseKind.SCALE, fraction=0.2)


def test_amplitude_on_other_kinds_rejected():
    with pytest.raises(InvalidSpecError):
        NoiseSpec(kind=NoiseKind.MISSING, fraction=0.2, amplitude=0.5)


@pytest.mark.parametrize("fraction", [-0.1, 1.2])
def test_fraction_out_of_range_rejected(fraction):
    with pytest.raises(InvalidSpecError):
        NoiseSpec(kind=NoiseKind.MISSING, fraction=fraction)


def test_uniform_label_needs_two_categories():
    anns = [original_box(1, 1, 1, 10, 10, 5, 5)]
    ds = simple_dataset(anns, num_classes=1)
    with pytest.raises(InvalidSpecError):
        inject(ds, NoiseSpec(kind=NoiseKind.UNIFORM_LABEL, fraction=1.0))


# --- per-box perturbations --------------------------------------------------------


def test_displacement_along_positive_x():
    # displacement length 0.25 * (4 + 2) / 2 = 0.75
    moved = displace_box(BBox(10, 10, 4, 2), angle=0.0, amplitude=0.25, image=IMG)
    assert moved.as_list() == pytest.approx([10.75, 10, 4, 2])


def test_displacement_at_right_angle():
    moved = displace_box(BBox(10, 10, 4, 2), angle=math.pi / 2, amplitude=0.25, image=IMG)
    assert moved.as_list() == pytest.approx([10, 10.75, 4, 2])


def test_displacement_clamped_to_image():
    moved = displace_box(BBox(95, 10, 4, 2), angle=0.0, amplitude=1.0, image=IMG)
    assert moved.as_list() == pytest.approx([96, 10, 4, 2])  # 100 - w


def test_grow_about_center():
    grown = rescale_box(BBox(10, 10, 4, 2), grow=True, amplitude=0.25, image=IMG)
    assert grown.as_list() == pytest.approx([9.5, 9.75, 5, 2.5])


def test_shrink_uses_reciprocal_factor():
    shrunk = rescale_box(BBox(10, 10, 4, 2), grow=False, amplitude=0.25, image=IMG)
    assert shrunk.as_list() == pytest.approx([10.4, 10.2, 3.2, 1.6])


def test_grow_clamped_at_image_border():
    grown = rescale_box(BBox(0, 0, 10, 10), grow=True, amplitude=1.0, image=IMG)
    # would span [-5, 15]; clamped to [0, 15]
    assert grown.as_list() == pytest.approx([0, 0, 15, 15])


# --- injection ---------------------------------------------------------------------


def test_missing_counts():
    ds = _base_dataset(n=10)
    noisy, ledger = inject(ds, NoiseSpec(kind=NoiseKind.MISSING, fraction=0.2, seed=7))
    assert len(noisy.annotations) == 8
    assert len(ledger) == 2
    removed = {e.annotation_id for e in ledger.entries}
    assert removed.isdisjoint({a.id for a in noisy.annotations})
    assert all(e.original is not None for e in ledger.entries)


@pytest.mark.parametrize("kind,amplitude", [
    (NoiseKind.UNIFORM_LABEL, None),
    (NoiseKind.LOCATION, 0.25),
    (NoiseKind.SCALE, 0.25),
    (NoiseKind.SPURIOUS, None),
    (NoiseKind.MISSING, None),
])
def test_count_exactness(kind, amplitude):
    ds = _base_dataset(n=23)
    for fraction in (0.0, 0.1, 0.2, 0.5, 1.0):
        spec = NoiseSpec(kind=kind, fraction=fraction, amplitude=amplitude, seed=3)
        _, ledger = inject(ds, spec)
        assert len(ledger) == round(fraction * 23)


def test_zero_targets_is_identity():
    ds = _base_dataset(n=4)
    noisy, ledger = inject(ds, NoiseSpec(kind=NoiseKind.MISSING, fraction=0.1, seed=1))
    assert len(ledger) == 0
    assert noisy == ds


def test_label_noise_always_changes_the_label():
    ds = _base_dataset(n=30)
    noisy, ledger = inject(ds, NoiseSpec(kind=NoiseKind.UNIFORM_LABEL, fraction=1.0, seed=11))
    noisy_by_id = {a.id: a for a in noisy.annotations}
    for entry in ledger.entries:
        assert entry.perturbed.category_id != entry.original.category_id
        assert noisy_by_id[entry.annotation_id] == entry.perturbed
        assert entry.perturbed.bbox == entry.original.bbox


def test_spurious_boxes_get_fresh_ids_and_bounded_dims():
    ds = _base_dataset(n=15)
    noisy, ledger = inject(ds, NoiseSpec(kind=NoiseKind.SPURIOUS, fraction=1.0, seed=13))
    assert len(noisy.annotations) == 30
    existing = {a.id for a in ds.annotations}
    image_map = ds.image_map()
    for entry in ledger.entries:
        added = entry.perturbed
        assert added.id not in existing
        img = image_map[added.image_id]
        assert added.bbox.w <= 0.40 * img.width
        assert added.bbox.h <= 0.40 * img.height
    assert len({a.id for a in noisy.annotations}) == 30


@pytest.mark.parametrize("kind,amplitude", [
    (NoiseKind.LOCATION, 0.5),
    (NoiseKind.LOCATION, 1.0),
    (NoiseKind.SCALE, 0.5),
    (NoiseKind.SCALE, 1.0),
    (NoiseKind.SPURIOUS, None),
])
def test_noisy_boxes_stay_inside_their_images(kind, amplitude):
    ds = _base_dataset(n=40)
    spec = NoiseSpec(kind=kind, fraction=1.0, amplitude=amplitude, seed=17)
    noisy, _ = inject(ds, spec)
    image_map = noisy.image_map()
    for a in noisy.annotations:
        img = image_map[a.image_id]
        assert a.bbox.x >= 0 and a.bbox.y >= 0
        assert a.bbox.right <= img.width + 1e-9
        assert a.bbox.bottom <= img.height + 1e-9
        assert a.bbox.w > 0 and a.bbox.h > 0


@pytest.mark.parametrize("kind,amplitude", [
    (NoiseKind.UNIFORM_LABEL, None),
    (NoiseKind.LOCATION, 0.25),
    (NoiseKind.SCALE, 0.25),
    (NoiseKind.SPURIOUS, None),
    (NoiseKind.MISSING, None),
])
def test_replaying_the_ledger_reconstructs_the_noisy_dataset(kind, amplitude):
    ds = _base_dataset(n=25)
    spec = NoiseSpec(kind=kind, fraction=0.4, amplitude=amplitude, seed=19)
    noisy, ledger = inject(ds, spec)
    assert replay(ds, ledger) == noisy


def test_missing_ledger_inverts_back_to_clean():
    ds = _base_dataset(n=25)
    noisy, ledger = inject(ds, NoiseSpec(kind=NoiseKind.MISSING, fraction=0.4, seed=23))
    restored = sorted(
        noisy.annotations + [e.original for e in ledger.entries], key=lambda a: a.id
    )
    assert restored == sorted(ds.annotations, key=lambda a: a.id)


@pytest.mark.parametrize("kind,amplitude", [
    (NoiseKind.UNIFORM_LABEL, None),
    (NoiseKind.LOCATION, 0.25),
    (NoiseKind.SCALE, 0.25),
    (NoiseKind.SPURIOUS, None),
    (NoiseKind.MISSING, None),
])
def test_same_seed_reproduces_identical_results(kind, amplitude):
    ds = _base_dataset(n=25)
    spec = NoiseSpec(kind=kind, fraction=0.3, amplitude=amplitude, seed=29)
    first = inject(ds, spec)
    second = inject(ds, spec)
    assert first == second


def test_different_seeds_differ():
    ds = _base_dataset(n=25)
    a = inject(ds, NoiseSpec(kind=NoiseKind.MISSING, fraction=0.3, seed=1))
    b = inject(ds, NoiseSpec(kind=NoiseKind.MISSING, fraction=0.3, seed=2))
    assert a != b
