#!/usr/bin/env python3
"""Convert pretrained VGG16 convolution weights into the binary container
that aesthnet loads (`backbone_weights` config key).

Accepts a Keras .h5 weight file (tf dim ordering, notop) or an .npz holding
arrays named '<layer>/weight' and '<layer>/bias'. Kernels may be HWIO or
OIHW; the container always stores OIHW float32.
"""
import argparse
import json
import struct

import numpy as np

LAYERS = [
    "block1_conv1", "block1_conv2",
    "block2_conv1", "block2_conv2",
    "block3_conv1", "block3_conv2", "block3_conv3",
    "block4_conv1", "block4_conv2", "block4_conv3",
    "block5_conv1", "block5_conv2", "block5_conv3",
]
OUT_CHANNELS = {"block1": 64, "block2": 128, "block3": 256,
                "block4": 512, "block5": 512}


def from_h5(path):
    import h5py
    datasets = {}
    with h5py.File(path, "r") as f:
        def visit(name, obj):
            if isinstance(obj, h5py.Dataset):
                datasets[name] = np.asarray(obj)
        f.visititems(visit)
    out = {}
    for layer in LAYERS:
        kernel = bias = None
        for name, arr in datasets.items():
            if layer not in name.split("/"):
                continue
            leaf = name.rsplit("/", 1)[-1]
            if leaf.startswith(("kernel", layer + "_W")):
                kernel = arr
            elif leaf.startswith(("bias", layer + "_b")):
                bias = arr
        if kernel is None or bias is None:
            raise SystemExit(f"{path}: no kernel/bias datasets for {layer}")
        out[layer] = (kernel, bias)
    return out


def from_npz(path):
    data = np.load(path)
    out = {}
    for layer in LAYERS:
        try:
            out[layer] = (data[layer + "/weight"], data[layer + "/bias"])
        except KeyError as e:
            raise SystemExit(f"{path}: missing array {e.args[0]}")
    return out


def to_oihw(layer, kernel):
    expected_out = OUT_CHANNELS[layer.split("_")[0]]
    if kernel.ndim != 4:
        raise SystemExit(f"{layer}: kernel must be rank 4, got {kernel.shape}")
    if kernel.shape[3] == expected_out:      # HWIO (Keras)
        return np.transpose(kernel, (3, 2, 0, 1))
    if kernel.shape[0] == expected_out:      # already OIHW
        return kernel
    raise SystemExit(f"{layer}: unrecognized kernel layout {kernel.shape}")


def write_container(path, tensors, metadata):
    with open(path, "wb") as f:
        f.write(b"AESNTNS1")
        meta = json.dumps(metadata).encode()
        f.write(struct.pack("<Q", len(meta)))
        f.write(meta)
        f.write(struct.pack("<Q", len(tensors)))
        for name, arr in tensors:
            arr = np.ascontiguousarray(arr, dtype="<f4")
            f.write(struct.pack("<I", len(name)))
            f.write(name.encode())
            f.write(struct.pack("<B", 0))    # dtype 0 = float32
            f.write(struct.pack("<I", arr.ndim))
            for d in arr.shape:
                f.write(struct.pack("<Q", d))
            f.write(arr.tobytes())


def main():
    ap = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("input", help=".h5 or .npz weight file")
    ap.add_argument("output", help="container path to write, e.g. vgg16.bin")
    args = ap.parse_args()

    loaded = (from_npz(args.input) if args.input.endswith(".npz")
              else from_h5(args.input))
    tensors = []
    for layer in LAYERS:
        kernel, bias = loaded[layer]
        tensors.append((layer + "/weight", to_oihw(layer, kernel)))
        tensors.append((layer + "/bias", np.asarray(bias).reshape(-1)))
    write_container(args.output, tensors, {
        "format": "aesthnet-backbone",
        "version": 1,
        "layout": "OIHW",
        "source": args.input,
    })
    total = sum(a.size for _, a in tensors)
    print(f"{args.output}: {len(tensors)} tensors, {total} parameters")


if __name__ == "__main__":
    main()
