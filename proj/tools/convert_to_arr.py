# Copyright 2026 The fmdseg Authors
# SPDX-License-Identifier: Apache-2.0
"""Convert Synapse multi-organ CT data into the fmdseg case layout.

Output layout (what `fmdseg train --data DIR` reads):

    DIR/cases/<id>/image.arr    float32 (slices, H, W), Hounsfield units
    DIR/cases/<id>/label.arr    uint8   (slices, H, W), values 0..8
    DIR/cases/<id>/spacing.txt  "z y x" in mm
    DIR/splits/{train,test}.txt

`.arr` files are plain `.npy` files under another name.

Two input flavours are supported:

  raw    RawData/Training/{img,label}/*.nii.gz (needs nibabel). Labels are
         remapped from the 13-structure scheme to the 8 evaluated organs.
  h5     preprocessed per-case volumes (<id>.npy.h5 with "image" and "label"
         datasets, needs h5py) and/or per-slice <id>_sliceNNN.npz files.
         Images there are already clipped to [-125, 275] and scaled to
         [0, 1]; they are mapped back to HU so preprocessing is unchanged.
"""

import argparse
import collections
import pathlib
import re
import sys

import numpy as np

# 13-structure id -> fmdseg organ id (aorta 1, gallbladder 2, kidney_left 3,
# kidney_right 4, liver 5, pancreas 6, spleen 7, stomach 8). Others -> 0.
RAW_TO_ORGAN = {8: 1, 4: 2, 3: 3, 2: 4, 6: 5, 11: 6, 1: 7, 7: 8}

TEST_CASES = ["0001", "0002", "0003", "0004", "0008", "0022",
              "0025", "0029", "0032", "0035", "0036", "0038"]
TRAIN_CASES = ["0005", "0006", "0007", "0009", "0010", "0021", "0023", "0024", "0026",
               "0027", "0028", "0030", "0031", "0033", "0034", "0037", "0039", "0040"]

WINDOW_LOW, WINDOW_HIGH = -125.0, 275.0


def write_case(out, case_id, image, labels, spacing):
    if image.shape != labels.shape or image.ndim != 3:
        raise ValueError(f"{case_id}: image {image.shape} and labels {labels.shape} must match (slices, H, W)")
    if labels.min() < 0 or labels.max() > 8:
        raise ValueError(f"{case_id}: labels outside 0..8")
    d = out / "cases" / case_id
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "image.arr", "wb") as f:
        np.save(f, np.ascontiguousarray(image, dtype=np.float32))
    with open(d / "label.arr", "wb") as f:
        np.save(f, np.ascontiguousarray(labels, dtype=np.uint8))
    (d / "spacing.txt").write_text(" ".join(f"{s:g}" for s in spacing) + "\n")
    print(f"{case_id}: {image.shape[0]} slices of {image.shape[1]}x{image.shape[2]}")


def remap_raw(labels):
    lut = np.zeros(256, dtype=np.uint8)
    for raw, organ in RAW_TO_ORGAN.items():
        lut[raw] = organ
    return lut[labels.astype(np.int64)]


def convert_raw(src, out):
    import nibabel as nib

    ids = []
    for img_path in sorted((src / "img").glob("img*.nii*")):
        num = re.search(r"(\d{4})", img_path.name).group(1)
        label_path = next((src / "label").glob(f"label{num}.nii*"))
        img = nib.load(str(img_path))
        # nibabel arrays are (x, y, z); the case layout is (z, y, x).
        image = np.transpose(np.asarray(img.dataobj, dtype=np.float32), (2, 1, 0))
        labels = np.transpose(np.asarray(nib.load(str(label_path)).dataobj), (2, 1, 0))
        zooms = img.header.get_zooms()
        write_case(out, "case" + num, image, remap_raw(labels), (zooms[2], zooms[1], zooms[0]))
        ids.append("case" + num)
    return ids


def to_hu(normalized):
    return normalized.astype(np.float32) * (WINDOW_HIGH - WINDOW_LOW) + WINDOW_LOW


def convert_h5(src, out, spacing):
    ids = []
    for path in sorted(src.rglob("*.npy.h5")):
        import h5py

        case_id = path.name.split(".")[0]
        with h5py.File(path, "r") as f:
            write_case(out, case_id, to_hu(f["image"][:]), f["label"][:], spacing)
        ids.append(case_id)
    slices = collections.defaultdict(list)
    for path in src.rglob("*_slice*.npz"):
        case_id, index = re.match(r"(.+)_slice(\d+)\.npz", path.name).groups()
        slices[case_id].append((int(index), path))
    for case_id in sorted(slices):
        if case_id in ids:
            continue
        loaded = [np.load(p) for _, p in sorted(slices[case_id])]
        image = np.stack([to_hu(z["image"]) for z in loaded])
        labels = np.stack([z["label"] for z in loaded])
        write_case(out, case_id, image, labels, spacing)
        ids.append(case_id)
    return ids


def write_splits(out, ids):
    present = set(ids)
    train = [c for c in ("case" + n for n in TRAIN_CASES) if c in present]
    test = [c for c in ("case" + n for n in TEST_CASES) if c in present]
    if not train or not test:
        print("standard split not available for these cases; write splits/ by hand", file=sys.stderr)
        return
    (out / "splits").mkdir(parents=True, exist_ok=True)
    (out / "splits" / "train.txt").write_text("\n".join(train) + "\n")
    (out / "splits" / "test.txt").write_text("\n".join(test) + "\n")
    print(f"splits: {len(train)} train, {len(test)} test")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("format", choices=["raw", "h5"])
    p.add_argument("src", type=pathlib.Path)
    p.add_argument("out", type=pathlib.Path)
    p.add_argument("--spacing", type=float, nargs=3, default=(1.0, 1.0, 1.0), metavar=("Z", "Y", "X"),
                   help="voxel spacing for h5/npz inputs, which do not carry it")
    args = p.parse_args(argv)
    ids = convert_raw(args.src, args.out) if args.format == "raw" else convert_h5(args.src, args.out, args.spacing)
    if not ids:
        p.error(f"no cases found under {args.src}")
    write_splits(args.out, ids)


if __name__ == "__main__":
    main()
