#!/usr/bin/env python3
"""Write the 5000-image MNIST subset shipped with mlxtend as IDX files.

The subset has 500 images per digit.  It is taken from the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz), which is fetched with pip unless a wheel
is given.  Output goes to data/mnist5k-{images-idx3,labels-idx1}-ubyte.
"""

import argparse
import gzip
import io
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def find_wheel(explicit, workdir):
    if explicit:
        return pathlib.Path(explicit)
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:",
         "-d", str(workdir), "mlxtend==0.24.0"],
        check=True, stdout=sys.stderr)
    wheels = sorted(pathlib.Path(workdir).glob("mlxtend-*.whl"))
    if not wheels:
        sys.exit("pip did not produce an mlxtend wheel")
    return wheels[0]


def parse(csv_text):
    images, labels = [], []
    for line in csv_text.splitlines():
        if not line.strip():
            continue
        row = [int(float(v)) for v in line.split(",")]
        if len(row) != 785:
            sys.exit(f"unexpected row width {len(row)}")
        pixels, label = row[:784], row[784]
        if not all(0 <= p <= 255 for p in pixels) or not 0 <= label <= 9:
            sys.exit("pixel or label out of range")
        images.append(bytes(pixels))
        labels.append(label)
    return images, labels


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wheel", help="path to an mlxtend wheel (default: pip download)")
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = find_wheel(args.wheel, tmp)
        with zipfile.ZipFile(wheel) as zf:
            text = gzip.decompress(zf.read(MEMBER)).decode("ascii")
    images, labels = parse(text)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mnist5k-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(out / "mnist5k-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(bytes(labels))
    counts = [labels.count(c) for c in range(10)]
    print(f"wrote {len(images)} images to {out}; per-class counts {counts}", file=sys.stderr)


if __name__ == "__main__":
    main()
