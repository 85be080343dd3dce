"""Numba-compiled versions of the hot kernels.

Loop bodies mirror the numpy backend's arithmetic and accumulation order
so the two paths agree bit-for-bit on gather-style ops (and on col2im,
whose tap-major add order is replicated exactly).
"""

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def _im2col_jit(x, kh, kw, stride, oh, ow, out):
    n, h, w, c = x.shape
    for img in range(n):
        row = img * oh * ow
        for oy in range(oh):
            for ox in range(ow):
                col = 0
                for i in range(kh):
                    for j in range(kw):
                        for ch in range(c):
                            out[row, col] = x[img, oy * stride + i, ox * stride + j, ch]
                            col += 1
                row += 1


def im2col(x, kh, kw, stride, pad):
    n, h, w, c = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    out = np.empty((n * oh * ow, kh * kw * c), dtype=x.dtype)
    _im2col_jit(np.ascontiguousarray(x), kh, kw, stride, oh, ow, out)
    return out


@njit(cache=True)
def _col2im_jit(cols, out, kh, kw, stride, oh, ow):
    n = out.shape[0]
    c = out.shape[3]
    # tap-major accumulation, same order as the numpy slice adds
    for i in range(kh):
        for j in range(kw):
            for img in range(n):
                for oy in range(oh):
                    for ox in range(ow):
                        for ch in range(c):
                            out[img, oy * stride + i, ox * stride + j, ch] += cols[img, oy, ox, i, j, ch]


def col2im(cols, x_shape, kh, kw, stride, pad):
    n, h, w, c = x_shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    cols = np.ascontiguousarray(cols.reshape(n, oh, ow, kh, kw, c))
    out = np.zeros((n, h + 2 * pad, w + 2 * pad, c), dtype=cols.dtype)
    _col2im_jit(cols, out, kh, kw, stride, oh, ow)
    if pad:
        out = out[:, pad:h + pad, pad:w + pad, :]
    return np.ascontiguousarray(out)


@njit(cache=True)
def _maxpool_jit(x, out, arg):
    n, oh, ow, c = out.shape
    for img in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    best = x[img, oy * 2, ox * 2, ch]
                    bi = 0
                    k = 0
                    for i in range(2):
                        for j in range(2):
                            v = x[img, oy * 2 + i, ox * 2 + j, ch]
                            if v > best:    # strict: first max wins, like argmax
                                best = v
                                bi = k
                            k += 1
                    out[img, oy, ox, ch] = best
                    arg[img, oy, ox, ch] = bi


def maxpool2x2(x):
    n, h, w, c = x.shape
    oh, ow = h // 2, w // 2
    out = np.empty((n, oh, ow, c), dtype=x.dtype)
    arg = np.empty((n, oh, ow, c), dtype=np.int8)
    _maxpool_jit(np.ascontiguousarray(x), out, arg)
    return out, arg


@njit(cache=True)
def _maxpool_bwd_jit(grad, arg, out):
    n, oh, ow, c = grad.shape
    for img in range(n):
        for oy in range(oh):
            for ox in range(ow):
                for ch in range(c):
                    k = arg[img, oy, ox, ch]
                    out[img, oy * 2 + k // 2, ox * 2 + k % 2, ch] = grad[img, oy, ox, ch]


def maxpool2x2_backward(grad, arg, x_shape):
    out = np.zeros(x_shape, dtype=grad.dtype)
    _maxpool_bwd_jit(np.ascontiguousarray(grad), arg, out)
    return out


@njit(cache=True)
def _bilinear_jit(src, out, y0, y1, fy, x0, x1, fx):
    oh, ow, c = out.shape
    for oy in range(oh):
        for ox in range(ow):
            for ch in range(c):
                top = src[y0[oy], x0[ox], ch] * (1.0 - fx[ox]) + src[y0[oy], x1[ox], ch] * fx[ox]
                bot = src[y1[oy], x0[ox], ch] * (1.0 - fx[ox]) + src[y1[oy], x1[ox], ch] * fx[ox]
                out[oy, ox, ch] = top * (1.0 - fy[oy]) + bot * fy[oy]


def bilinear_resize(img, out_h, out_w):
    from .numpy_backend import _resize_axis_coords

    h, w, c = img.shape
    y0, y1, fy = _resize_axis_coords(out_h, h)
    x0, x1, fx = _resize_axis_coords(out_w, w)
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    _bilinear_jit(np.ascontiguousarray(img.astype(np.float64)), out, y0, y1, fy, x0, x1, fx)
    if img.dtype == np.uint8:
        return np.floor(out + 0.5).clip(0, 255).astype(np.uint8)
    return out.astype(img.dtype)


@njit(cache=True)
def _iou_matrix_jit(a, b, out):
    for i in range(a.shape[0]):
        ax1, ay1 = a[i, 0], a[i, 1]
        ax2, ay2 = a[i, 0] + a[i, 2], a[i, 1] + a[i, 3]
        area_a = a[i, 2] * a[i, 3]
        for j in range(b.shape[0]):
            iw = min(ax2, b[j, 0] + b[j, 2]) - max(ax1, b[j, 0])
            ih = min(ay2, b[j, 1] + b[j, 3]) - max(ay1, b[j, 1])
            if iw <= 0.0 or ih <= 0.0:
                out[i, j] = 0.0
                continue
            inter = iw * ih
            union = area_a + b[j, 2] * b[j, 3] - inter
            out[i, j] = inter / union if union > 0 else 0.0


def iou_matrix(boxes_a, boxes_b):
    a = np.ascontiguousarray(np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4))
    b = np.ascontiguousarray(np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4))
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    _iou_matrix_jit(a, b, out)
    return out


@njit(cache=True)
def _nms_jit(boxes, order, iou_thresh, kept):
    n = order.shape[0]
    suppressed = np.zeros(n, dtype=np.bool_)
    n_kept = 0
    for pos in range(n):
        if suppressed[pos]:
            continue
        i = order[pos]
        kept[n_kept] = i
        n_kept += 1
        ax1, ay1 = boxes[i, 0], boxes[i, 1]
        ax2, ay2 = boxes[i, 0] + boxes[i, 2], boxes[i, 1] + boxes[i, 3]
        area_a = boxes[i, 2] * boxes[i, 3]
        for q in range(pos + 1, n):
            if suppressed[q]:
                continue
            j = order[q]
            iw = min(ax2, boxes[j, 0] + boxes[j, 2]) - max(ax1, boxes[j, 0])
            ih = min(ay2, boxes[j, 1] + boxes[j, 3]) - max(ay1, boxes[j, 1])
            if iw <= 0.0 or ih <= 0.0:
                continue
            inter = iw * ih
            union = area_a + boxes[j, 2] * boxes[j, 3] - inter
            if union > 0 and inter / union > iou_thresh:
                suppressed[q] = True
    return n_kept


def nms(boxes, scores, iou_thresh):
    boxes = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((boxes[:, 1], boxes[:, 0], -scores))
    kept = np.empty(len(order), dtype=np.int64)
    n_kept = _nms_jit(boxes, order.astype(np.int64), float(iou_thresh), kept)
    return kept[:n_kept]
