"""``eggq-extract``: export CNN feature matrices for a directory of images."""

from __future__ import annotations

import sys

import click

from . import __version__
from .backbones import BACKBONES, get_backbone, list_backbones
from .extract import DimensionMismatchError, extract


@click.command()
@click.version_option(__version__)
@click.option("--images", "image_dir", type=click.Path(), default=None,
              help="directory of <egg_id>.<ext> images")
@click.option("--backbone", type=click.Choice([s.name for s in BACKBONES],
                                              case_sensitive=False),
              default=None)
@click.option("--out", "out_csv", type=click.Path(), default=None,
              help="output feature CSV path")
@click.option("--batch-size", default=8, show_default=True)
@click.option("--weights", default="imagenet", show_default=True,
              help="pretrained weight set to request")
@click.option("--list-backbones", "show_list", is_flag=True,
              help="print supported backbones and feature widths, then exit")
def main(image_dir, backbone, out_csv, batch_size, weights, show_list) -> None:
    """Run a frozen pretrained backbone over egg images and save the
    global-average-pooled features as a CSV feature matrix."""
    if show_list:
        for name, dim in list_backbones():
            click.echo(f"{name}\t{dim}")
        return
    missing = [flag for flag, value in
               (("--images", image_dir), ("--backbone", backbone), ("--out", out_csv))
               if value is None]
    if missing:
        raise click.UsageError(f"missing required options: {', '.join(missing)}")
    try:
        spec = get_backbone(backbone)
        path = extract(image_dir, spec, out_csv,
                       batch_size=batch_size, weights=weights)
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except DimensionMismatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(4)
    click.echo(f"wrote {path} ({spec.name}, {spec.expected_dim} columns)")


if __name__ == "__main__":
    main()
