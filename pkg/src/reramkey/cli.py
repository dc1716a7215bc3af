"""``reramkey`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 key mismatch on ``regen``.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import experiments as ex
from . import extractor as fe
from . import puf
from .layout import SCHEME_NAMES, scheme_id_from_name
from .plot import render_svg
from .polar import DecoderConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class DataError(click.ClickException):
    exit_code = EXIT_DATA


def _floats(values, default):
    out = []
    for v in values or default:
        for tok in str(v).split(","):
            tok = tok.strip()
            if tok:
                try:
                    out.append(float(tok))
                except ValueError:
                    raise click.BadParameter(f"not a number: {tok!r}", param_hint="--p") from None
    for p in out:
        if not 0.0 <= p <= 0.5:
            raise click.BadParameter(f"{p} outside [0, 0.5]", param_hint="--p")
    return out


def _decoders(values, default=("sc",)):
    out = []
    for v in values or default:
        for tok in v.split(","):
            try:
                out.append(DecoderConfig.parse(tok.strip()).label)
            except ValueError as exc:
                raise click.BadParameter(str(exc), param_hint="--decoder") from None
    return out


def _write(path, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise DataError(str(exc)) from None


def _run_opts(padding, literal, scale, workers) -> ex.RunOptions:
    sid = None if padding is None else scheme_id_from_name(padding)
    return ex.RunOptions(scheme_id=sid, literal_substitution=literal, parity_llr_scale=scale,
                         workers=workers)


_padding_opt = click.option("--padding", type=click.Choice(sorted(SCHEME_NAMES.values())),
                            default=None, help="BCH bit placement (default: best for the sizes)")
_literal_opt = click.option("--literal-substitution", is_flag=True,
                            help="Substitute helper bits into the transformed noisy word, hard decisions only.")
_scale_opt = click.option("--parity-llr-scale", type=float, default=fe.DEFAULT_PARITY_LLR_SCALE,
                          show_default=True, help="Reliability factor for BCH parity positions.")
_workers_opt = click.option("--workers", type=click.IntRange(1), default=1, show_default=True)
_seed_opt = click.option("--seed", type=click.IntRange(0), default=0, show_default=True)
_trials_opt = click.option("--trials", type=click.IntRange(1), default=1000, show_default=True)
_csv_opt = click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
                        help="Output CSV (stdout when omitted).")
_model_opts = [
    click.option("--pop-mean", type=float, default=puf.DEFAULT_MODEL.pop_mean, show_default=True),
    click.option("--pop-sd", type=float, default=puf.DEFAULT_MODEL.pop_sd, show_default=True),
    click.option("--read-sd", type=float, default=puf.DEFAULT_MODEL.read_sd, show_default=True),
    click.option("--lobe-offset", type=float, default=puf.DEFAULT_MODEL.lobe_offset, show_default=True),
]


def model_options(f):
    for opt in reversed(_model_opts):
        f = opt(f)
    return f


def _model(pop_mean, pop_sd, read_sd, lobe_offset) -> puf.CellModel:
    try:
        return puf.CellModel(pop_mean, pop_sd, read_sd, lobe_offset)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


def _load_cells(csv_in, synthetic_seed, cells, readings, model) -> puf.CellMeasurementSet:
    if csv_in is not None:
        try:
            return puf.read_measurements_csv(csv_in)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc)) from None
    if synthetic_seed is None:
        raise click.UsageError("give either --measurements or --synthetic-seed")
    return puf.simulate_cells(cells, readings, model, synthetic_seed)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Ternary ReRAM PUF key generation with a BCH + polar fuzzy extractor."""


@cli.command("simulate-cells")
@click.option("--cells", type=click.IntRange(1), default=254, show_default=True)
@click.option("--readings", type=click.IntRange(1), default=102, show_default=True)
@_seed_opt
@model_options
@_csv_opt
def simulate_cells_cmd(cells, readings, seed, pop_mean, pop_sd, read_sd, lobe_offset, csv_path):
    """Write a synthetic measurement CSV."""
    s = puf.simulate_cells(cells, readings, _model(pop_mean, pop_sd, read_sd, lobe_offset), seed)
    if csv_path is None:
        import io
        buf = io.StringIO()
        puf.write_measurements_csv(s, buf)
        click.echo(buf.getvalue(), nl=False)
    else:
        puf.write_measurements_csv(s, csv_path)


_input_opts = [
    click.option("--measurements", "csv_in", type=click.Path(dir_okay=False), default=None,
                 help="Measurement CSV: cell_id,reading_index,r_on_ohms[,v_set_volts]"),
    click.option("--synthetic-seed", type=click.IntRange(0), default=None,
                 help="Use a synthetic device instead of a CSV."),
    click.option("--cells", type=click.IntRange(1), default=254, show_default=True),
    click.option("--readings", type=click.IntRange(1), default=102, show_default=True),
]


def input_options(f):
    for opt in reversed(_input_opts):
        f = opt(f)
    return model_options(f)


@cli.command()
@input_options
@click.option("--record", "record_path", type=click.Path(dir_okay=False), required=True)
@_padding_opt
def enroll(csv_in, synthetic_seed, cells, readings, pop_mean, pop_sd, read_sd, lobe_offset,
           record_path, padding):
    """Enroll a device: write the record file and print the key hash."""
    cs = _load_cells(csv_in, synthetic_seed, cells, readings,
                     _model(pop_mean, pop_sd, read_sd, lobe_offset))
    params = fe.full_size_params(None if padding is None else scheme_id_from_name(padding))
    try:
        prof = puf.profile(cs)
        resp = puf.extract_response(cs, prof, None, params.bch.k)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    rec, key = fe.register(resp.bits, params, mask=prof.mask)
    key.wipe()
    try:
        Path(record_path).write_bytes(fe.serialize_record(rec))
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    click.echo(rec.key_hash.hex())


@cli.command()
@input_options
@click.option("--record", "record_path", type=click.Path(dir_okay=False), required=True)
@click.option("--reading-index", type=int, default=None,
              help="Which repeated reading to use (default: per-cell mean).")
@click.option("--flip-p", type=click.FloatRange(0, 1), default=0.0, show_default=True,
              help="Extra simulated bit flips applied to the response.")
@click.option("--flip-seed", type=click.IntRange(0), default=0, show_default=True)
@click.option("--p", "channel_p", type=click.FloatRange(0, 0.5), default=fe.DEFAULT_CHANNEL_P,
              show_default=True, help="Flip probability assumed by the decoder.")
@click.option("--decoder", default="sc", show_default=True, help="sc | scl:<L>[:hash] | bp:<iters>")
@_literal_opt
@_scale_opt
def regen(csv_in, synthetic_seed, cells, readings, pop_mean, pop_sd, read_sd, lobe_offset,
          record_path, reading_index, flip_p, flip_seed, channel_p, decoder, literal_substitution,
          parity_llr_scale):
    """Regenerate the key from a fresh reading; exit 3 when it does not match."""
    cfg = DecoderConfig.parse(_decoders([decoder])[0])
    try:
        rec = fe.deserialize_record(Path(record_path).read_bytes())
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    cs = _load_cells(csv_in, synthetic_seed, cells, readings,
                     _model(pop_mean, pop_sd, read_sd, lobe_offset))
    try:
        t1, t2 = puf.compute_thresholds(cs)
        if max(rec.mask, default=-1) >= cs.num_cells:
            raise ValueError("record mask refers to cells missing from the measurements")
        prof = puf.TernaryProfile(t1, t2, np.zeros(cs.num_cells, np.uint8), rec.mask)
        resp = puf.extract_response(cs, prof, reading_index, rec.bch_k)
    except (ValueError, IndexError) as exc:
        raise DataError(str(exc)) from None
    if flip_p:
        resp = puf.flip_bits(resp, flip_p, flip_seed)
    res = fe.regenerate(resp.bits, rec, cfg, channel_p, literal_substitution=literal_substitution,
                        parity_llr_scale=parity_llr_scale)
    click.echo(res.key_hash.hex())
    click.echo(f"match={str(res.match).lower()} decoder={res.decoder} "
               f"bch_corrections={res.bch_corrections} flags={','.join(res.flags) or '-'}", err=True)
    if not res.match:
        sys.exit(EXIT_MISMATCH)


@cli.command("mc-failure")
@click.option("--p", "p_values", multiple=True, help="Flip probabilities (repeat or comma list).")
@_trials_opt
@click.option("--decoder", "decoders", multiple=True, help="Decoders (repeat or comma list).")
@_seed_opt
@click.option("--attacker", is_flag=True, help="Regenerate from attacker responses instead.")
@_padding_opt
@_literal_opt
@_scale_opt
@_workers_opt
@_csv_opt
def mc_failure(p_values, trials, decoders, seed, attacker, padding, literal_substitution,
               parity_llr_scale, workers, csv_path):
    """Monte Carlo failure probability with one-sided Wilson 95% upper bounds."""
    rows = ex.run_failure_mc(_floats(p_values, ["0.15"]), trials, _decoders(decoders), seed,
                             attacker, _run_opts(padding, literal_substitution, parity_llr_scale, workers))
    _write(csv_path, ex.to_csv("mc_failure", rows))


@cli.command("ber-sweep")
@click.option("--p", "p_values", multiple=True)
@_trials_opt
@click.option("--decoder", default="sc", show_default=True)
@_seed_opt
@_padding_opt
@_literal_opt
@_scale_opt
@_workers_opt
@_csv_opt
def ber_sweep(p_values, trials, decoder, seed, padding, literal_substitution, parity_llr_scale,
              workers, csv_path):
    """Raw-key bit error for legitimate and attacker responses across flip probabilities."""
    ps = _floats(p_values, ["0,0.05,0.1,0.15,0.2,0.25,0.3"])
    rows = ex.run_ber_sweep(ps, trials, _decoders([decoder])[0], seed,
                            _run_opts(padding, literal_substitution, parity_llr_scale, workers))
    _write(csv_path, ex.to_csv("ber_sweep", rows))


@cli.command("decoder-compare")
@click.option("--p", "p_values", multiple=True)
@_trials_opt
@click.option("--decoder", "decoders", multiple=True)
@_seed_opt
@_padding_opt
@_scale_opt
@_workers_opt
@_csv_opt
def decoder_compare(p_values, trials, decoders, seed, padding, parity_llr_scale, workers, csv_path):
    """Block error rate and mean runtime per decoder on paired noise."""
    rows = ex.run_decoder_compare(
        _floats(p_values, ["0.1,0.15,0.2"]), trials,
        _decoders(decoders, ("sc", "scl:8", "bp:500")), seed,
        _run_opts(padding, False, parity_llr_scale, workers))
    _write(csv_path, ex.to_csv("decoder_compare", rows))


@cli.command()
@click.option("--decoder", "decoders", multiple=True)
@click.option("--trials", type=click.IntRange(5), default=100, show_default=True)
@click.option("--p", "channel_p", type=click.FloatRange(0, 0.5), default=0.15, show_default=True)
@_seed_opt
@_padding_opt
@_csv_opt
def timing(decoders, trials, channel_p, seed, padding, csv_path):
    """Median-of-means regeneration time per decoder (machine dependent)."""
    rows = ex.run_timing(_decoders(decoders, ("sc", "scl:8", "bp:500")), trials, channel_p, seed,
                         opts=_run_opts(padding, False, fe.DEFAULT_PARITY_LLR_SCALE, 1))
    _write(csv_path, ex.to_csv("timing", rows))


@cli.command()
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out", "svg_path", type=click.Path(dir_okay=False), required=True)
def plot(csv_path, svg_path):
    """Render an experiment CSV as an SVG chart."""
    try:
        svg = render_svg(Path(csv_path).read_text())
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    _write(svg_path, svg)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="reramkey", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
