#!/usr/bin/env python3
"""Set-of-mark reference renderer (Pillow) for golden images.

Usage: som_oracle.py PAGE_DIR SCROLL_Y OUT.png [--viewport 1280x720]

PAGE_DIR holds page.png (full-page screenshot) and expected_elements.json
(page-coordinate boxes). The viewport is cropped at SCROLL_Y, boxes are
clipped to it, then outlines and index tags are drawn.
"""
import argparse
import json
import pathlib

from PIL import Image, ImageDraw

DIGITS = [
    [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
    [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
    [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
    [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
    [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
    [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
    [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
    [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
    [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
    [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
]
PALETTE = [(230, 25, 75), (60, 180, 75), (0, 130, 200), (245, 130, 48),
           (145, 30, 180), (0, 128, 128), (170, 110, 40), (128, 0, 0)]
BORDER, SCALE, PAD = 2, 2, 2


def rect(d, x, y, w, h, c):
    if w > 0 and h > 0:
        d.rectangle([x, y, x + w - 1, y + h - 1], fill=c)


def render(page_dir: pathlib.Path, scroll: int, vw: int, vh: int) -> Image.Image:
    full = Image.open(page_dir / "page.png").convert("RGB")
    view = Image.new("RGB", (vw, vh), (255, 255, 255))
    view.paste(full.crop((0, scroll, min(vw, full.width), min(scroll + vh, full.height))), (0, 0))
    elements = json.loads((page_dir / "expected_elements.json").read_text())["elements"]
    boxes = []
    for e in elements:
        x, y, w, h = e["bbox"]
        x0, y0 = max(0, x), max(0, y - scroll)
        x1, y1 = min(vw, x + w), min(vh, y + h - scroll)
        if x1 > x0 and y1 > y0:
            boxes.append((e["index"], x0, y0, x1 - x0, y1 - y0))
    d = ImageDraw.Draw(view)
    for i, x, y, w, h in boxes:
        c = PALETTE[i % 8]
        t = min(BORDER, h)
        s = min(BORDER, w)
        rect(d, x, y, w, t, c)
        rect(d, x, y + h - t, w, t, c)
        rect(d, x, y, s, h, c)
        rect(d, x + w - s, y, s, h, c)
    for i, x, y, _, _ in boxes:
        label = str(i)
        tw = PAD * 2 + len(label) * 6 * SCALE - SCALE
        th = PAD * 2 + 7 * SCALE
        x = max(0, min(x, vw - tw))
        y = max(0, min(y, vh - th))
        rect(d, x, y, tw, th, PALETTE[i % 8])
        for k, ch in enumerate(label):
            gx = x + PAD + k * 6 * SCALE
            for row, bits in enumerate(DIGITS[int(ch)]):
                for col in range(5):
                    if bits >> (4 - col) & 1:
                        rect(d, gx + col * SCALE, y + PAD + row * SCALE, SCALE, SCALE, (255, 255, 255))
    return view


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("page_dir", type=pathlib.Path)
    ap.add_argument("scroll", type=int)
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--viewport", default="1280x720")
    a = ap.parse_args()
    vw, vh = map(int, a.viewport.split("x"))
    render(a.page_dir, a.scroll, vw, vh).save(a.out)


if __name__ == "__main__":
    main()
