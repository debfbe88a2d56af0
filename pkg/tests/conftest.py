import json

import pytest

from boxaudit.dataset_io import AnnotatedBox, BoxSource, Category, Dataset, ImageInfo
from boxaudit.geometry import BBox


def coco_payload(images, categories, annotations):
    return {"images": images, "categories": categories, "annotations": annotations}


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return path


def original_box(ann_id, image_id, category_id, x, y, w, h):
    return AnnotatedBox(
        id=ann_id,
        image_id=image_id,
        category_id=category_id,
        bbox=BBox(x, y, w, h),
        source=BoxSource.ORIGINAL,
    )


def predicted_box(ann_id, image_id, category_id, x, y, w, h, score):
    return AnnotatedBox(
        id=ann_id,
        image_id=image_id,
        category_id=category_id,
        bbox=BBox(x, y, w, h),
        source=BoxSource.PREDICTED,
        score=score,
    )


def simple_dataset(annotations, num_images=4, num_classes=3, size=1000):
    images = [ImageInfo(id=i, width=size, height=size, file_name=f"{i}.jpg") for i in range(1, num_images + 1)]
    categories = [Category(id=m, name=f"class{m}", source_id=m) for m in range(1, num_classes + 1)]
    return Dataset(images=images, categories=categories, annotations=annotations)


@pytest.fixture
def tiny_coco_path(tmp_path):
    payload = coco_payload(
        images=[{"id": 1, "width": 100, "height": 80, "file_name": "a.jpg"}],
        categories=[{"id": 7, "name": "cat"}],
        annotations=[{"id": 1, "image_id": 1, "category_id": 7, "bbox": [10, 10, 20, 15]}],
    )
    return write_json(tmp_path / "tiny.json", payload)
