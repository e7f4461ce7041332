#!/usr/bin/env python3
"""Regenerates the bundled desk-scale data under data/.

watermarks/  twelve procedurally drawn RGBA logos, sized so the
             watermarked test crops sit near 29 dB PSNR at transparency 0.3
clean/train  192x192 RGB tiles from the left 60% of scikit-image sample photos
clean/test   128x128 RGB crops from the right 40%, disjoint from the tiles
"""
import argparse
import pathlib

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont
from skimage import data as skdata
from skimage.transform import rescale

TEST_SIZE = 128
TRAIN_SIZE = 192
TRAIN_TILES = 4  # per photo
TEST_SCALE = 1.5
MAX_TEST_COVERAGE = 0.3

PALETTE = [
    (255, 255, 255), (240, 30, 30), (20, 20, 20), (30, 90, 240),
    (250, 210, 40), (40, 200, 90), (200, 60, 220), (255, 140, 0),
    (0, 200, 220), (255, 255, 255), (90, 50, 20), (230, 230, 230),
]


def draw_mask(kind: int, big: int) -> Image.Image:
    mask = Image.new("L", (big, big), 0)
    d = ImageDraw.Draw(mask)
    m = big // 10
    if kind == 0:  # ring with a bar
        d.ellipse([m, m, big - m, big - m], outline=255, width=big // 6)
        d.rectangle([big // 2 - big // 10, m, big // 2 + big // 10, big - m], fill=255)
    elif kind == 1:  # star
        cx = cy = big / 2
        pts = []
        for i in range(10):
            r = (big / 2 - m) * (1.0 if i % 2 == 0 else 0.5)
            a = np.pi / 2 + i * np.pi / 5
            pts.append((cx + r * np.cos(a), cy - r * np.sin(a)))
        d.polygon(pts, fill=255)
    elif kind == 2:  # text block
        font = ImageFont.load_default(size=big * 2 // 5)
        d.text((m, big // 4), "WM", fill=255, font=font, stroke_width=big // 40, stroke_fill=255)
        d.rectangle([m, m, big - m, big - m], outline=255, width=big // 10)
    elif kind == 3:  # diagonal stripes
        for i in range(-big, big, big // 4):
            d.line([(i, big), (i + big, 0)], fill=255, width=big // 8)
        d.ellipse([m, m, big - m, big - m], outline=255, width=big // 10)
    elif kind == 4:  # copyright-like circle with letter
        d.ellipse([m, m, big - m, big - m], outline=255, width=big // 7)
        font = ImageFont.load_default(size=big * 3 // 5)
        d.text((big * 3 // 10, big // 6), "C", fill=255, font=font, stroke_width=big // 40,
               stroke_fill=255)
    else:  # checker cross
        c = big // 2
        w = big // 6
        d.rectangle([c - w, m, c + w, big - m], fill=255)
        d.rectangle([m, c - w, big - m, c + w], fill=255)
        d.rectangle([m, m, m + 2 * w, m + 2 * w], fill=255)
    return mask


def logo(k: int, size: int, rng: np.random.Generator) -> Image.Image:
    s = 4  # supersampling
    kind = k % 6
    # Shrink until the mask covers at most MAX_TEST_COVERAGE of a test crop
    # at the test scale, so test-set placement never exhausts its retries.
    while True:
        mask = draw_mask(kind, size * s)
        mask = mask.filter(ImageFilter.GaussianBlur(s / 2)).resize((size, size), Image.LANCZOS)
        nonzero = (np.asarray(mask) > 0).mean()
        if nonzero * (TEST_SCALE * size) ** 2 <= MAX_TEST_COVERAGE * TEST_SIZE ** 2:
            break
        size -= 1
    soft = rng.uniform(0.9, 1.0)
    alpha = (np.asarray(mask, dtype=np.float64) * soft).round().astype(np.uint8)
    base = np.array(PALETTE[k], dtype=np.float64)
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    shade = 0.8 + 0.2 * (yy if k % 2 else xx)
    rgb = np.clip(base[None, None, :] * shade[..., None], 0, 255).astype(np.uint8)
    return Image.fromarray(np.dstack([rgb, alpha]), "RGBA")


def photos():
    gray = ["camera", "brick", "grass", "gravel", "coins", "clock"]
    color = ["astronaut", "chelsea", "coffee", "hubble_deep_field", "immunohistochemistry",
             "retina", "rocket"]
    for name in color + gray:
        img = getattr(skdata, name)()
        if img.ndim == 2:
            img = np.stack([img] * 3, axis=-1)
        img = img[..., :3].astype(np.float64) / 255.0
        if min(img.shape[:2]) > 800:
            img = rescale(img, 0.5, channel_axis=-1, anti_aliasing=True)
        yield name, img


def save(arr, path):
    Image.fromarray((np.clip(arr, 0, 1) * 255).round().astype(np.uint8), "RGB").save(path)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[2] / "data"))
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    rng = np.random.default_rng(args.seed)

    wm = out / "watermarks"
    wm.mkdir(parents=True, exist_ok=True)
    for k in range(12):
        logo(k, int(rng.integers(38, 53)), rng).save(wm / f"wm{k + 1:02d}.png")

    train, test = out / "clean" / "train", out / "clean" / "test"
    train.mkdir(parents=True, exist_ok=True)
    test.mkdir(parents=True, exist_ok=True)
    tile_rng = np.random.default_rng([args.seed, 1])
    n_test = 0
    for name, img in photos():
        h, w, _ = img.shape
        # Left 60% feeds training tiles, right 40% the test crops.
        split = int(w * 0.6)
        for j in range(TRAIN_TILES):
            y = int(tile_rng.integers(0, h - TRAIN_SIZE + 1))
            x = int(tile_rng.integers(0, split - TRAIN_SIZE + 1))
            save(img[y:y + TRAIN_SIZE, x:x + TRAIN_SIZE], train / f"{name}_{j}.png")
        if n_test < 8 and w - split >= TEST_SIZE and h >= TEST_SIZE:
            y = int(rng.integers(0, h - TEST_SIZE + 1))
            x = int(rng.integers(split, w - TEST_SIZE + 1))
            save(img[y:y + TEST_SIZE, x:x + TEST_SIZE], test / f"{name}.png")
            n_test += 1

if __name__ == "__main__":
    main()
