"""Deep-feature extractor: fine-tunes pretrained CNNs on image folders and
exports feature bundles consumable by the fusion engine."""

from .archs import ARCHITECTURES, build_model, default_input_size
from .dataset import ImageFolder, load_images, scan_image_folder
from .export import ExportResult, ExtractorJob, fine_tune_and_export
from .validate import ValidationReport, validate_bundle

__version__ = "0.1.0"
