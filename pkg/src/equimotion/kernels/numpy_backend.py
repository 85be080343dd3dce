"""Vectorized numpy reference implementations of the hot kernels.

Array layout is NHWC throughout. These are the fallback path when numba
is unavailable or disabled; the numba backend must match these outputs
(bit-exact for gather-style ops, within float addition reordering for
scatter-style ops).
"""

import numpy as np

BACKEND = "numpy"


def im2col(x, kh, kw, stride, pad):
    """Lower (N,H,W,C) into (N*OH*OW, kh*kw*C) patch rows.

    Column order is (kh, kw, C), matching the conv weight layout.
    """
    n, h, w, c = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    win = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]            # (N, OH, OW, C, kh, kw)
    win = win.transpose(0, 1, 2, 4, 5, 3)       # (N, OH, OW, kh, kw, C)
    return np.ascontiguousarray(win).reshape(n * oh * ow, kh * kw * c)


def col2im(cols, x_shape, kh, kw, stride, pad):
    """Scatter-add patch rows back onto an (N,H,W,C) gradient canvas."""
    n, h, w, c = x_shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    cols = cols.reshape(n, oh, ow, kh, kw, c)
    out = np.zeros((n, h + 2 * pad, w + 2 * pad, c), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, i:i + stride * oh:stride, j:j + stride * ow:stride, :] += cols[:, :, :, i, j, :]
    if pad:
        out = out[:, pad:h + pad, pad:w + pad, :]
    return out


def maxpool2x2(x):
    """2x2/stride-2 max pool with argmax, odd edges dropped.

    Returns (out, arg) where arg holds the within-window winner index
    (0..3, row-major) for the backward scatter.
    """
    n, h, w, c = x.shape
    oh, ow = h // 2, w // 2
    v = x[:, :oh * 2, :ow * 2, :].reshape(n, oh, 2, ow, 2, c)
    v = v.transpose(0, 1, 3, 2, 4, 5).reshape(n, oh, ow, 4, c)
    arg = v.argmax(axis=3).astype(np.int8)
    out = np.take_along_axis(v, arg[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    return out, arg


def maxpool2x2_backward(grad, arg, x_shape):
    n, h, w, c = x_shape
    oh, ow = h // 2, w // 2
    v = np.zeros((n, oh, ow, 4, c), dtype=grad.dtype)
    np.put_along_axis(v, arg[:, :, :, None, :].astype(np.int64), grad[:, :, :, None, :], axis=3)
    v = v.reshape(n, oh, ow, 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
    out = np.zeros(x_shape, dtype=grad.dtype)
    out[:, :oh * 2, :ow * 2, :] = v.reshape(n, oh * 2, ow * 2, c)
    return out


def _resize_axis_coords(out_size, in_size):
    # half-pixel-center mapping, clamped; identity when sizes match
    coords = (np.arange(out_size, dtype=np.float64) + 0.5) * (in_size / out_size) - 0.5
    coords = np.clip(coords, 0.0, in_size - 1.0)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, in_size - 1)
    frac = coords - lo
    return lo, hi, frac


def bilinear_resize(img, out_h, out_w):
    """Bilinear resize of an (H,W,C) image; uint8 in -> uint8 out (round half up)."""
    h, w, _ = img.shape
    y0, y1, fy = _resize_axis_coords(out_h, h)
    x0, x1, fx = _resize_axis_coords(out_w, w)
    src = img.astype(np.float64)
    top = src[y0][:, x0] * (1.0 - fx)[None, :, None] + src[y0][:, x1] * fx[None, :, None]
    bot = src[y1][:, x0] * (1.0 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
    out = top * (1.0 - fy)[:, None, None] + bot * fy[:, None, None]
    if img.dtype == np.uint8:
        return np.floor(out + 0.5).clip(0, 255).astype(np.uint8)
    return out.astype(img.dtype)


def iou_matrix(boxes_a, boxes_b):
    """Pairwise IoU of (x,y,w,h) float box arrays -> (Na,Nb) float64."""
    a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    ax1, ay1 = a[:, 0], a[:, 1]
    ax2, ay2 = a[:, 0] + a[:, 2], a[:, 1] + a[:, 3]
    bx1, by1 = b[:, 0], b[:, 1]
    bx2, by2 = b[:, 0] + b[:, 2], b[:, 1] + b[:, 3]
    iw = np.maximum(0.0, np.minimum(ax2[:, None], bx2[None, :]) - np.maximum(ax1[:, None], bx1[None, :]))
    ih = np.maximum(0.0, np.minimum(ay2[:, None], by2[None, :]) - np.maximum(ay1[:, None], by1[None, :]))
    inter = iw * ih
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    return np.where(union > 0, inter / np.maximum(union, 1e-300), 0.0)


def nms(boxes, scores, iou_thresh):
    """Greedy non-maximum suppression; returns kept indices, score-descending.

    Ties in score break toward smaller (x, y) so the result is
    deterministic regardless of input order.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((boxes[:, 1], boxes[:, 0], -scores))
    kept = []
    suppressed = np.zeros(len(order), dtype=bool)
    ious = iou_matrix(boxes, boxes)
    for pos, i in enumerate(order):
        if suppressed[pos]:
            continue
        kept.append(int(i))
        rest = order[pos + 1:]
        suppressed[pos + 1:] |= ious[i, rest] > iou_thresh
    return np.array(kept, dtype=np.int64)
