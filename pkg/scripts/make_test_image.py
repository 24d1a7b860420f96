"""Write the bundled 256x256 grayscale test image (scikit-image 'camera', public domain)."""

import argparse

import numpy as np
from skimage import data
from skimage.transform import resize

from ogerlrmc.pgm import save_image


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output", nargs="?", default="data/camera256.pgm")
    ap.add_argument("--size", type=int, default=256)
    args = ap.parse_args()
    img = data.camera().astype(np.float64) / 255.0
    small = resize(img, (args.size, args.size), anti_aliasing=True)
    save_image(small, args.output)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
