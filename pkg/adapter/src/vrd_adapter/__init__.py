"""Bridge between pretrained text-and-layout models and the canonical
dataset/prediction file formats of the evaluation harness."""

__version__ = "0.1.0"
