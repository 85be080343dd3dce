"""Convolutional bases for the emotion classifier.

Each base is built as an ordered list of named blocks so the freeze
policy can address "everything before the last block". Three families
are available:

- vgg16: the full 13-conv / 5-block topology (2-2-3-3-3 convs, channels
  64/128/256/512/512, 2x2 pool after each block). At 150px input the
  feature map is 4x4x512.
- resnet50v2: a reduced pre-activation residual network (7x7/2 stem +
  pool, four stages of two residual blocks, channels 64/128/256/512).
- xception: a reduced separable-conv network (strided entry conv, three
  downsampling separable blocks with 1x1 projections, two middle
  residual blocks, one exit block to 512 channels).

The reduced families keep the architectural idiom at a size a CPU can
train; `width_multiplier` scales every channel count for quick runs.
No externally pretrained weights ship with the package: bases start at
He initialization, and weight files produced by training here can be
reloaded as a "pretrained" starting point.
"""

import numpy as np

from ..errors import ModelError
from ..nn import Conv2D, DepthwiseConv2D, MaxPool2D, ReLU, Residual, Sequential


class BuiltBase:
    """A constructed base: named blocks plus the output feature geometry."""

    def __init__(self, name, blocks, feature_shape):
        self.name = name
        self.blocks = list(blocks)  # [(block_name, Layer)]
        self.feature_shape = feature_shape  # (h, w, c)

    @property
    def feature_size(self) -> int:
        h, w, c = self.feature_shape
        return h * w * c

    def forward(self, x, train=False):
        for _, block in self.blocks:
            x = block.forward(x, train=train)
        return x

    def params(self):
        out = []
        for _, block in self.blocks:
            out.extend(block.params())
        return out


def _scaled(channels: int, multiplier: float) -> int:
    return max(1, int(round(channels * multiplier)))


def _check_side(name, side, min_side):
    if side < min_side:
        raise ModelError(
            "input side %d too small for base %r (minimum %d)" % (side, name, min_side))


def _build_vgg16(side, multiplier, rng):
    _check_side("vgg16", side, 32)
    plan = [(2, 64), (2, 128), (3, 256), (3, 512), (3, 512)]
    blocks = []
    cin = 3
    h = w = side
    for bi, (n_convs, ch) in enumerate(plan, start=1):
        c = _scaled(ch, multiplier)
        layers = []
        for ci in range(1, n_convs + 1):
            prefix = "base.block%d.conv%d" % (bi, ci)
            layers.append(Conv2D(prefix, cin, c, rng=rng))
            layers.append(ReLU(prefix + ".relu"))
            cin = c
        layers.append(MaxPool2D("base.block%d.pool" % bi))
        blocks.append(("block%d" % bi, Sequential("base.block%d" % bi, layers)))
        h, w = h // 2, w // 2
    return BuiltBase("vgg16", blocks, (h, w, cin))


def _preact_residual(name, cin, cout, stride, rng):
    """Pre-activation residual: x + conv(relu(conv(relu(x))))."""
    inner = [
        ReLU(name + ".preact1"),
        Conv2D(name + ".conv1", cin, cout, stride=stride, rng=rng),
        ReLU(name + ".preact2"),
        Conv2D(name + ".conv2", cout, cout, rng=rng),
    ]
    project = None
    if stride != 1 or cin != cout:
        project = Conv2D(name + ".project", cin, cout, k=1, stride=stride, pad=0, rng=rng)
    return Residual(name, inner, project=project)


def _build_resnet50v2(side, multiplier, rng):
    _check_side("resnet50v2", side, 64)
    h = w = side
    stem_c = _scaled(64, multiplier)
    stem = Sequential("base.stem", [
        Conv2D("base.stem.conv", 3, stem_c, k=7, stride=2, pad=3, rng=rng),
        ReLU("base.stem.relu"),
        MaxPool2D("base.stem.pool"),
    ])
    h = ((h - 1) // 2 + 1) // 2
    w = ((w - 1) // 2 + 1) // 2
    blocks = [("stem", stem)]
    cin = stem_c
    for si, (ch, stride) in enumerate([(64, 1), (128, 2), (256, 2), (512, 2)], start=1):
        c = _scaled(ch, multiplier)
        name = "base.stage%d" % si
        layers = [
            _preact_residual(name + ".res1", cin, c, stride, rng),
            _preact_residual(name + ".res2", c, c, 1, rng),
        ]
        if si == 4:
            layers.append(ReLU(name + ".out"))  # final post-activation
        blocks.append(("stage%d" % si, Sequential(name, layers)))
        if stride == 2:
            h = (h - 1) // 2 + 1
            w = (w - 1) // 2 + 1
        cin = c
    return BuiltBase("resnet50v2", blocks, (h, w, cin))


def _separable(name, cin, cout, rng):
    """Depthwise 3x3 followed by a pointwise 1x1 mix."""
    return [
        DepthwiseConv2D(name + ".dw", cin, rng=rng),
        Conv2D(name + ".pw", cin, cout, k=1, rng=rng),
    ]


def _pool_projection(name, cin, cout, rng):
    # 1x1 conv then the same 2x2 pool as the main path, so shapes agree
    # for any spatial size (including odd ones)
    return Sequential(name, [
        Conv2D(name + ".conv", cin, cout, k=1, rng=rng),
        MaxPool2D(name + ".pool"),
    ])


def _build_xception(side, multiplier, rng):
    _check_side("xception", side, 64)
    h = w = side
    entry_c = _scaled(32, multiplier)
    entry = Sequential("base.entry", [
        Conv2D("base.entry.conv", 3, entry_c, stride=2, rng=rng),
        ReLU("base.entry.relu"),
    ])
    h = (h - 1) // 2 + 1
    w = (w - 1) // 2 + 1
    blocks = [("entry", entry)]
    cin = entry_c
    for bi, ch in enumerate([64, 128, 256], start=1):
        c = _scaled(ch, multiplier)
        name = "base.down%d" % bi
        inner = (_separable(name + ".sep1", cin, c, rng)
                 + [ReLU(name + ".relu")]
                 + _separable(name + ".sep2", c, c, rng)
                 + [MaxPool2D(name + ".pool")])
        blocks.append(("down%d" % bi,
                       Residual(name, inner, project=_pool_projection(name + ".project", cin, c, rng))))
        h, w = h // 2, w // 2
        cin = c
    mid_layers = []
    for mi in (1, 2):
        name = "base.middle.res%d" % mi
        inner = ([ReLU(name + ".preact1")] + _separable(name + ".sep1", cin, cin, rng)
                 + [ReLU(name + ".preact2")] + _separable(name + ".sep2", cin, cin, rng))
        mid_layers.append(Residual(name, inner))
    blocks.append(("middle", Sequential("base.middle", mid_layers)))
    exit_c = _scaled(512, multiplier)
    name = "base.exit"
    inner = ([ReLU(name + ".preact")] + _separable(name + ".sep1", cin, cin, rng)
             + [ReLU(name + ".relu")] + _separable(name + ".sep2", cin, exit_c, rng)
             + [MaxPool2D(name + ".pool")])
    blocks.append(("exit",
                   Residual(name, inner, project=_pool_projection(name + ".project", cin, exit_c, rng))))
    h, w = h // 2, w // 2
    if h < 1 or w < 1:
        raise ModelError("input side %d too small for base 'xception'" % side)
    return BuiltBase("xception", blocks, (h, w, exit_c))


BASE_BUILDERS = {
    "vgg16": _build_vgg16,
    "resnet50v2": _build_resnet50v2,
    "xception": _build_xception,
}

BASE_NAMES = tuple(sorted(BASE_BUILDERS))


def build_base(name: str, side: int, multiplier: float = 1.0, rng=None) -> BuiltBase:
    if name not in BASE_BUILDERS:
        raise ModelError("unknown base %r (available: %s)" % (name, ", ".join(BASE_NAMES)))
    rng = rng or np.random.default_rng(0)
    return BASE_BUILDERS[name](side, multiplier, rng)
