"""The seven supported architectures and their transfer-learning heads.

Each model is the published backbone with the classification head replaced
by a fresh softmax layer over the target classes.  The feature view
exported per image is the activation of the last layer before that head:
the global-average-pooled backbone output for every architecture except
VGG16, which keeps its two 4096-wide fully connected layers.  Feature
widths are read from the built model, never hard-coded.

TensorFlow imports stay inside functions so that bundle validation and
folder scanning never pay the framework start-up cost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

ARCHITECTURES = ("mobilenetv2", "vgg16", "resnet50", "resnet101", "nasnet", "inceptionv3", "xception")

_DEFAULT_SIZES = {
    "mobilenetv2": 224,
    "vgg16": 224,
    "resnet50": 224,
    "resnet101": 224,
    "nasnet": 331,  # the large variant
    "inceptionv3": 299,
    "xception": 299,
}


def default_input_size(arch: str) -> int:
    return _DEFAULT_SIZES[arch]


@dataclass(frozen=True)
class BuiltModel:
    model: object  # keras.Model
    feature_layer: str
    last_conv_layer: str
    weights_source: str  # "imagenet" or "random"
    preprocess: object  # callable mapping [0,255] RGB to network inputs


def _backbone(arch: str, input_shape, weights):
    from keras import applications

    builders = {
        "mobilenetv2": (applications.MobileNetV2, applications.mobilenet_v2.preprocess_input),
        "vgg16": (applications.VGG16, applications.vgg16.preprocess_input),
        "resnet50": (applications.ResNet50, applications.resnet.preprocess_input),
        "resnet101": (applications.ResNet101, applications.resnet.preprocess_input),
        "nasnet": (applications.NASNetLarge, applications.nasnet.preprocess_input),
        "inceptionv3": (applications.InceptionV3, applications.inception_v3.preprocess_input),
        "xception": (applications.Xception, applications.xception.preprocess_input),
    }
    builder, preprocess = builders[arch]
    base = builder(include_top=False, weights=weights, input_shape=input_shape, pooling=None)
    return base, preprocess


def build_model(
    arch: str,
    input_size: int,
    n_classes: int,
    pretrained: bool = True,
    freeze_depth: int = 0,
) -> BuiltModel:
    """Backbone + fresh softmax head; falls back to random initialization
    with a warning when the pretrained weights cannot be fetched."""
    if arch not in ARCHITECTURES:
        raise ValueError(f"unsupported architecture '{arch}' (choose from {ARCHITECTURES})")
    import keras
    from keras import layers

    shape = (input_size, input_size, 3)
    weights_source = "random"
    base = preprocess = None
    if pretrained:
        try:
            base, preprocess = _backbone(arch, shape, "imagenet")
            weights_source = "imagenet"
        except Exception as e:
            warnings.warn(
                f"pretrained weights for {arch} unavailable ({e}); "
                "falling back to random initialization",
                stacklevel=2,
            )
    if base is None:
        base, preprocess = _backbone(arch, shape, None)

    for layer in base.layers[: max(0, freeze_depth)]:
        layer.trainable = False

    x = base.output
    if arch == "vgg16":
        x = layers.Flatten(name="flatten")(x)
        x = layers.Dense(4096, activation="relu", name="fc1")(x)
        x = layers.Dense(4096, activation="relu", name="fc2")(x)
        feature_layer = "fc2"
    else:
        x = layers.GlobalAveragePooling2D(name="pooled_features")(x)
        feature_layer = "pooled_features"
    out = layers.Dense(n_classes, activation="softmax", name="predictions")(x)
    model = keras.Model(base.input, out)

    last_conv = None
    for layer in reversed(model.layers):
        if len(layer.output.shape) == 4:
            last_conv = layer.name
            break
    if last_conv is None:
        raise RuntimeError(f"{arch}: no 4-D layer found for activation export")
    return BuiltModel(
        model=model,
        feature_layer=feature_layer,
        last_conv_layer=last_conv,
        weights_source=weights_source,
        preprocess=preprocess,
    )
