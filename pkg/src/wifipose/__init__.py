"""WiFi-CSI human pose estimation at desk scale.

Synthetic multipath channel simulation, a convolutional landmark regressor
trained under cross-modal (teacher-annotation) supervision, and PCK
evaluation, wired together behind the ``wifipose`` CLI.
"""

from .csi import PathComponent, SubcarrierSample, amplitude, superpose
from .dataio import (
    Dataset,
    DatasetManifest,
    KEYPOINT_NAMES,
    SKELETON_EDGES,
    SyncSample,
    load_dataset,
    save_dataset,
    split,
    window_for_frame,
)
from .metrics import PckConfig, PckReport, pck, report_table
from .preprocess import bilinear_resize, flatten_antennas, standardize
from .synth import Scene, SceneConfig, make_scene, render_csi
from .train import TrainConfig, TrainHistory, lr_at, mse_loss, sgd_step, train
from .wpnet import WpnetConfig, WPNet, build_wpnet, load_checkpoint, save_checkpoint

__version__ = "0.1.0"
