"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

import json
import sys
from pathlib import Path

import click

from .dataset import SENSOR_MASKS, DataError, apply_mask, load_csv, load_split, write_dataset
from .decoder import DecodeError, map_decode
from .evaluation import ablation_report, evaluate, render_report, render_sweep
from .lstm import TrainConfig, gradient_check, random_instance, train
from .modelfile import ModelFile, ModelFileError, load_model, save_model
from .pipeline import label_path
from .synth import GenConfig, SessionSpec, gen_dataset

EXIT_USAGE = 1
EXIT_DATA = 2


def _parse_session(text):
    try:
        classes = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated classes, got {text!r}") from None
    if not 1 <= len(classes) <= 8 or not all(1 <= c <= 6 for c in classes):
        raise click.BadParameter(f"session {text!r} must list 1-8 classes from 1..6")
    return classes


def _model_paths(model, hiddens):
    if len(hiddens) == 1:
        return [Path(model)]
    p = Path(model)
    return [p.with_name(f"{p.stem}_h{H}{p.suffix}") for H in hiddens]


@click.group()
def cli():
    """Continuous hand-gesture recognition with an LSTM and MAP spotting."""


@cli.command()
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--per-class", type=int, default=200, show_default=True,
              help="Training single gestures per class.")
@click.option("--test-per-class", type=int, default=50, show_default=True)
@click.option("--train-sessions", type=int, default=300, show_default=True)
@click.option("--test-sessions", type=int, default=200, show_default=True)
@click.option("--min-gestures", type=int, default=2, show_default=True)
@click.option("--max-gestures", type=int, default=4, show_default=True)
@click.option("--sessions", "fixed", multiple=True, callback=lambda c, p, v: [_parse_session(s) for s in v],
              help='Extra test session with a fixed gesture order, e.g. "4,2,5,6". Repeatable.')
@click.option("--noise", type=float, default=0.1, show_default=True)
@click.option("--duration-jitter", type=float, default=0.2, show_default=True)
@click.option("--amplitude-jitter", type=float, default=0.2, show_default=True)
@click.option("--gap-max", type=int, default=8, show_default=True)
@click.option("--mask", type=click.Choice(SENSOR_MASKS), default="both", show_default=True)
def gen(data_dir, seed, per_class, test_per_class, train_sessions, test_sessions,
        min_gestures, max_gestures, fixed, noise, duration_jitter, amplitude_jitter,
        gap_max, mask):
    """Generate a synthetic dataset (CSV files plus manifest.json)."""
    cfg = GenConfig(seed=seed, duration_jitter=duration_jitter,
                    amplitude_jitter=amplitude_jitter, noise_sigma=noise,
                    gap_range=(0, gap_max), sensor_mask=mask)
    spec = SessionSpec(train_sessions, test_sessions, min_gestures, max_gestures, tuple(fixed))
    train_set, test_set = gen_dataset(cfg, per_class, spec, test_per_class)
    meta = cfg.to_dict()
    meta.update(per_class=per_class, test_per_class=test_per_class,
                train_sessions=train_sessions, test_sessions=test_sessions,
                fixed_sessions=[list(s) for s in fixed])
    manifest = write_dataset(data_dir, train_set, test_set, meta)
    click.echo(f"wrote {len(train_set)} train and {len(test_set)} test sequences; "
               f"manifest {manifest}")


@cli.command("train")
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--model", type=click.Path(dir_okay=False), required=True)
@click.option("--hidden", type=int, multiple=True, default=(32,), show_default=True,
              help="Hidden dimension; repeat for a sweep (writes MODEL_h<H>.json).")
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--clip", type=float, default=5.0, show_default=True)
@click.option("--classes", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def train_cmd(data_dir, model, hidden, epochs, lr, batch_size, clip, classes, seed):
    """Train one model per --hidden value on the dataset's train split."""
    if not Path(data_dir).is_dir():
        raise DataError(f"dataset directory not found: {data_dir}")
    sequences = [seq for seq, _ in load_split(data_dir, "train")]
    if not sequences:
        raise DataError(f"{data_dir}: manifest lists no training files")
    for n, seq in enumerate(sequences):
        if seq.labels is None:
            raise DataError(f"training sequence {n} has no label column")
        if seq.labels.max() > classes:
            raise DataError(
                f"training sequence {n} has label {seq.labels.max()} but --classes is {classes}"
            )
    for H, path in zip(hidden, _model_paths(model, hidden)):
        cfg = TrainConfig(hidden_dim=H, lr=lr, epochs=epochs, batch_size=batch_size,
                          seed=seed, clip=clip, num_classes=classes)
        click.echo(f"training H={H} on {len(sequences)} sequences")
        result = train(sequences, cfg,
                       on_epoch=lambda e, loss: click.echo(f"  epoch {e:3d}  loss {loss:.6f}"))
        save_model(ModelFile(result.params, result.output, cfg.to_dict(), seed), path)
        click.echo(f"wrote {path}")


@cli.command()
@click.argument("sequence", type=click.Path(dir_okay=False))
@click.option("--model", type=click.Path(dir_okay=False), required=True)
@click.option("--k", type=int, required=True, help="Number of gestures to recognise.")
@click.option("--mask", type=click.Choice(SENSOR_MASKS), default="both", show_default=True)
@click.option("--dump-path", is_flag=True, help="Print the per-timestep label path.")
@click.option("--report", type=click.Path(dir_okay=False), help="Also write the result as JSON.")
def infer(sequence, model, k, mask, dump_path, report):
    """Recognise K gestures in one CSV recording."""
    if k < 1:
        raise click.BadParameter("--k must be at least 1", param_hint="--k")
    mf = load_model(model)
    seq = load_csv(sequence)
    x = apply_mask(seq.x, mask)
    if x.shape[1] != mf.params.input_dim:
        raise DataError(f"{sequence} has {x.shape[1]} channels, model expects {mf.params.input_dim}")
    A = label_path(mf.params, mf.output, x)
    try:
        rec = map_decode(A, k)
    except DecodeError as exc:
        raise DecodeError(f"cannot decode {sequence}: {exc}") from None
    counts = rec.spotting.counts
    click.echo("R = (" + ", ".join(map(str, rec.R)) + ")")
    click.echo(f"posterior = {float(rec.posterior):.6g} ({rec.posterior})")
    click.echo("|I_i| = " + "  ".join(f"{i}:{n}" for i, n in counts.items()))
    if dump_path:
        click.echo("path = " + " ".join(map(str, A.labels)))
    if report:
        out = {
            "R": list(rec.R),
            "posterior": float(rec.posterior),
            "posterior_exact": str(rec.posterior),
            "cardinality": {str(i): n for i, n in counts.items()},
            "first_occurrence": {str(i): t for i, t in sorted(rec.spotting.first.items())},
            "path": list(A.labels),
        }
        Path(report).write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


@cli.command("eval")
@click.option("--data-dir", type=click.Path(file_okay=False), required=True)
@click.option("--model", type=click.Path(dir_okay=False), multiple=True, required=True,
              help="Repeat to compare models (hidden-size sweep).")
@click.option("--mask", type=click.Choice(SENSOR_MASKS), multiple=True,
              help="Sensor set(s); several values produce the ablation table.")
@click.option("--report", type=click.Path(dir_okay=False),
              help="Write the structured report here and the text table next to it (.txt).")
def eval_cmd(data_dir, model, mask, report):
    """Score models on the test split, decoding each file with its true k."""
    pairs = load_split(data_dir, "test")
    if not pairs:
        raise DataError(f"{data_dir}: manifest lists no test files")
    seqs = [s for s, _ in pairs]
    truths = [t for _, t in pairs]
    masks = tuple(dict.fromkeys(mask)) or ("both",)
    results, texts = [], []
    for path in model:
        mf = load_model(path)
        if len(masks) == 1:
            rep = evaluate(mf.params, mf.output, seqs, truths, masks[0])
        else:
            rep = ablation_report(mf.params, mf.output, seqs, truths, masks)
        results.append((path, mf, rep))
        title = f"model {path} (H={mf.params.hidden_dim}, mask={'/'.join(masks)})"
        texts.append(title + "\n" + render_report(rep))
    if len(results) > 1:
        texts.append(render_sweep([(mf.params.hidden_dim, rep) for _, mf, rep in results]))
    text = "\n".join(texts)
    click.echo(text, nl=False)
    if report:
        structured = {
            str(path): dict(rep.to_dict(), hidden=mf.params.hidden_dim)
            for path, mf, rep in results
        }
        if len(results) == 1:
            structured = next(iter(structured.values()))
        Path(report).write_text(json.dumps(structured, indent=1, sort_keys=True) + "\n")
        Path(report).with_suffix(".txt").write_text(text)


@cli.command()
@click.option("--instances", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--step", type=float, default=1e-5, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@click.option("--N", "n_in", type=int, default=3, show_default=True)
@click.option("--hidden", type=int, default=4, show_default=True)
@click.option("--classes", type=int, default=3, show_default=True)
@click.option("--T", "steps", type=int, default=5, show_default=True)
def gradcheck(instances, seed, step, tolerance, n_in, hidden, classes, steps):
    """Check BPTT gradients against central finite differences."""
    worst = 0.0
    failed = 0
    for n in range(instances):
        p, o, x, labels = random_instance(seed + n, n_in, hidden, classes, steps)
        rep = gradient_check(p, o, x, labels, step, tolerance)
        click.echo(f"instance {n}: {rep}")
        worst = max(worst, rep.max_rel_error)
        failed += not rep.passed
    click.echo(f"max relative error over {instances} instances: {worst:.3e}")
    if failed:
        click.echo(f"{failed} instance(s) failed", err=True)
        raise click.exceptions.Exit(EXIT_DATA)


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="gesture-lstm", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_DATA
    except (DataError, ModelFileError, DecodeError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
