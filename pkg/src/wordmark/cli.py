"""Operator-facing command line: lexicon building, watermarking, owner-side
verification, the bit-watermark baseline, simulations, and the proxy server.

Exit codes: 0 success, 1 usage error, 2 data or configuration error.
``verify`` always exits 0 when it produces a report; the decision is in the
payload, not the exit code.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bitmark, detector, lexicon as lexmod, simulate, watermark
from ._version import __version__


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_lines(path: str) -> list[str]:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _resolve_key(args) -> watermark.WatermarkKey:
    if getattr(args, "key_file", None):
        return watermark.key_from_file(args.key_file)
    return watermark.key_from_env(args.key_env)


def _add_key_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--key-env",
        default=watermark.DEFAULT_KEY_ENV,
        metavar="NAME",
        help="environment variable holding the hex-encoded key (default %(default)s)",
    )
    parser.add_argument(
        "--key-file", metavar="PATH", help="file holding the hex-encoded key"
    )


def cmd_build_lexicon(args) -> int:
    if args.kind == "spelling":
        if not args.pairs:
            raise ValueError("--pairs is required for a spelling lexicon")
        built = lexmod.build_spelling_lexicon(lexmod.load_spelling_pairs(args.pairs))
    else:
        if not args.lexemes:
            raise ValueError("--lexemes is required for a synonym lexicon")
        pos = None if args.all_pos else args.pos
        lexemes = lexmod.load_lexemes(args.lexemes, pos=pos)
        built = lexmod.build_synonym_lexicon(lexemes, args.substitutes, args.size)
    lexmod.save_lexicon(built, args.out)
    print(
        f"wrote {len(built)} groups (kind={built.kind.value}, "
        f"M={built.n_substitutes}) to {args.out}; "
        f"fingerprint {lexmod.lexicon_fingerprint(built)}",
        file=sys.stderr,
    )
    return 0


def cmd_watermark(args) -> int:
    lex = lexmod.load_lexicon(args.lexicon)
    key = _resolve_key(args)
    lines = _read_lines(args.input)
    out_lines = []
    log_records = []
    for lineno, line in enumerate(lines, start=1):
        marked, replacements = watermark.apply_watermark(line, lex, key)
        out_lines.append(marked)
        for rep in replacements:
            log_records.append(
                {
                    "line": lineno,
                    "start": rep.start,
                    "end": rep.end,
                    "original": rep.original,
                    "target": rep.target,
                    "group": rep.candidate,
                }
            )
    _write_text(args.out, "\n".join(out_lines) + ("\n" if out_lines else ""))
    if args.log:
        _write_text(args.log, "".join(json.dumps(r) + "\n" for r in log_records))
    return 0


def cmd_verify(args) -> int:
    lex = lexmod.load_lexicon(args.lexicon)
    key = _resolve_key(args)
    corpus = _read_lines(args.corpus)
    report = detector.verify(corpus, lex, key, tau=args.tau, alpha=args.alpha)
    if args.format == "text":
        sys.stdout.write(detector.render_text_report(report))
    else:
        print(report.to_json())
    return 0


def cmd_bitmark_select(args) -> int:
    key = _resolve_key(args)
    unit = bitmark.BitUnit(args.unit)
    sets = bitmark.read_candidate_sets(_read_lines(args.candidates))
    selection_lines = []
    chosen_texts = []
    for input_id, candidates in sets:
        index, stats = bitmark.select_bit_watermarked(candidates, unit, key)
        selection_lines.append(bitmark.format_selection(input_id, index, stats))
        chosen_texts.append(candidates[index])
    _write_text(args.out, "\n".join(selection_lines) + ("\n" if selection_lines else ""))
    if args.emit_text:
        _write_text(args.emit_text, "\n".join(chosen_texts) + ("\n" if chosen_texts else ""))
    return 0


def cmd_bitmark_verify(args) -> int:
    key = _resolve_key(args)
    unit = bitmark.BitUnit(args.unit)
    corpus = _read_lines(args.corpus)
    report = bitmark.bit_verify(corpus, unit, key, tau=args.tau, alpha=args.alpha)
    if args.format == "text":
        sys.stdout.write(detector.render_text_report(report))
    else:
        print(report.to_json())
    return 0


def _sim_config(args, n_substitutes: int, fraction: float = 0.0, fidelity: float = 0.0):
    return simulate.SurrogateConfig(
        watermarked_fraction=fraction,
        fidelity=fidelity,
        occurrences_per_group=args.occurrences,
        n_groups=args.groups,
        n_substitutes=n_substitutes,
        seed=args.seed,
        natural=simulate.NaturalEmissionModel(gamma=args.gamma),
    )


def cmd_simulate_innocent(args) -> int:
    lex = lexmod.load_lexicon(args.lexicon)
    config = _sim_config(args, lex.n_substitutes)
    corpus = simulate.simulate_innocent_corpus(config, lex)
    _write_text(args.out, "\n".join(corpus) + "\n")
    return 0


def cmd_simulate_surrogate(args) -> int:
    lex = lexmod.load_lexicon(args.lexicon)
    key = _resolve_key(args)
    config = _sim_config(args, lex.n_substitutes, fraction=args.P, fidelity=args.phi)
    corpus = simulate.simulate_surrogate_corpus(config, lex, key)
    _write_text(args.out, "\n".join(corpus) + "\n")
    return 0


def _emit_sweep(result: simulate.SweepResult, args) -> None:
    _write_text(args.out, result.to_csv())
    if args.config_out:
        _write_text(args.config_out, result.config_json() + "\n")
    else:
        print(result.config_json(), file=sys.stderr)


def cmd_simulate_mixture_sweep(args) -> int:
    lex = lexmod.load_lexicon(args.lexicon)
    key = _resolve_key(args)
    fractions = [float(v) for v in args.P.split(",") if v != ""]
    config = _sim_config(args, lex.n_substitutes, fidelity=args.phi)
    result = simulate.mixture_sweep(config, fractions, lex, key, tau=args.tau, alpha=args.alpha)
    _emit_sweep(result, args)
    return 0


def cmd_simulate_m_sweep(args) -> int:
    key = _resolve_key(args)
    pos = None if args.all_pos else args.pos
    lexemes = lexmod.load_lexemes(args.lexemes, pos=pos)
    m_values = [int(v) for v in args.M.split(",") if v != ""]
    config = _sim_config(args, n_substitutes=1, fraction=1.0, fidelity=1.0)
    result = simulate.m_sweep(config, m_values, lexemes, key, tau=args.tau, alpha=args.alpha)
    _emit_sweep(result, args)
    return 0


def cmd_serve(args) -> int:
    from . import service  # deferred: pulls in the HTTP stack

    config = service.load_service_config(args.config) if args.config else service.ServiceConfig()
    overrides = {
        "listen": args.listen,
        "lexicon_path": args.lexicon,
        "key_env": args.key_env_override,
        "key_file": args.key_file,
        "timeout_s": args.timeout,
        "max_body_bytes": args.max_body,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, value)
    if args.upstream is not None:
        if args.upstream == "stub":
            config.upstream_mode = "stub_echo"
            config.upstream_url = None
        else:
            config.upstream_mode = "http"
            config.upstream_url = args.upstream
    service.serve(config)
    return 0


def _add_sim_flags(parser, need_lexicon=True):
    if need_lexicon:
        parser.add_argument("--lexicon", required=True, help="lexicon TSV path")
    parser.add_argument("--groups", type=int, default=100, help="groups to draw from (default %(default)s)")
    parser.add_argument("--occurrences", type=int, default=10, help="occurrences per group (default %(default)s)")
    parser.add_argument("--gamma", type=float, default=0.95, help="natural candidate-emission probability (default %(default)s)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default %(default)s)")
    parser.add_argument("--out", default="-", help="output path (default stdout)")


def _add_verify_flags(parser, default_tau=None):
    parser.add_argument("--tau", type=float, default=default_tau, help="hit-ratio screening threshold")
    parser.add_argument("--alpha", type=float, default=detector.DEFAULT_ALPHA, help="significance level (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wordmark", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wordmark {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-lexicon", help="build a substitution lexicon TSV")
    p.add_argument("--kind", choices=["synonym", "spelling"], default="synonym")
    p.add_argument("--lexemes", help="lexeme TSV (synonym kind)")
    p.add_argument("--pairs", help="us<TAB>uk pair TSV (spelling kind)")
    p.add_argument("--substitutes", type=int, default=2, metavar="M", help="substitutes per candidate (default %(default)s)")
    p.add_argument("--size", type=int, default=20, help="number of groups to build (default %(default)s)")
    p.add_argument("--pos", default="ADJ", help="keep only lexemes with this POS tag (default %(default)s)")
    p.add_argument("--all-pos", action="store_true", help="disable the POS filter")
    p.add_argument("--out", required=True, help="output lexicon path")
    p.set_defaults(handler=cmd_build_lexicon)

    p = sub.add_parser("watermark", help="watermark text line by line")
    p.add_argument("input", nargs="?", default="-", help="input file (default stdin)")
    p.add_argument("--lexicon", required=True)
    _add_key_flags(p)
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.add_argument("--log", help="write a JSONL replacement log here")
    p.set_defaults(handler=cmd_watermark)

    p = sub.add_parser("verify", help="verify a suspect corpus against a lexicon and key")
    p.add_argument("corpus", nargs="?", default="-", help="corpus file (default stdin)")
    p.add_argument("--lexicon", required=True)
    _add_key_flags(p)
    _add_verify_flags(p)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("bitmark", help="bit-watermark baseline")
    bitsub = p.add_subparsers(dest="bitmark_command", required=True, parser_class=_Parser)

    ps = bitsub.add_parser("select", help="select the most-ones candidate per input")
    ps.add_argument("candidates", nargs="?", default="-", help="input_id<TAB>candidate file (default stdin)")
    ps.add_argument("--unit", choices=[u.value for u in bitmark.BitUnit], default="unigram")
    _add_key_flags(ps)
    ps.add_argument("--out", default="-", help="selection TSV output (default stdout)")
    ps.add_argument("--emit-text", help="also write the selected texts here, one per line")
    ps.set_defaults(handler=cmd_bitmark_select)

    pv = bitsub.add_parser("verify", help="match-count test of a corpus at p=0.5")
    pv.add_argument("corpus", nargs="?", default="-")
    pv.add_argument("--unit", choices=[u.value for u in bitmark.BitUnit], default="unigram")
    _add_key_flags(pv)
    _add_verify_flags(pv, default_tau=bitmark.BIT_NULL_PROBABILITY)
    pv.add_argument("--format", choices=["json", "text"], default="json")
    pv.set_defaults(handler=cmd_bitmark_verify)

    p = sub.add_parser("simulate", help="parametric extraction simulations")
    simsub = p.add_subparsers(dest="simulate_command", required=True, parser_class=_Parser)

    pi = simsub.add_parser("innocent", help="corpus from an unexposed model")
    _add_sim_flags(pi)
    pi.set_defaults(handler=cmd_simulate_innocent)

    pu = simsub.add_parser("surrogate", help="corpus from an extraction-trained model")
    _add_sim_flags(pu)
    pu.add_argument("--P", type=float, default=1.0, help="watermarked training fraction (default %(default)s)")
    pu.add_argument("--phi", type=float, default=1.0, help="memorization fidelity (default %(default)s)")
    _add_key_flags(pu)
    pu.set_defaults(handler=cmd_simulate_surrogate)

    pm = simsub.add_parser("mixture-sweep", help="sweep the watermarked training fraction")
    _add_sim_flags(pm)
    pm.add_argument("--P", required=True, help="comma-separated fractions, e.g. 0,0.1,0.5,1")
    pm.add_argument("--phi", type=float, default=1.0, help="memorization fidelity (default %(default)s)")
    _add_key_flags(pm)
    _add_verify_flags(pm)
    pm.add_argument("--config-out", help="write the JSON config echo here (default stderr)")
    pm.set_defaults(handler=cmd_simulate_mixture_sweep)

    pw = simsub.add_parser("m-sweep", help="sweep the substitute count, rebuilding the lexicon")
    _add_sim_flags(pw, need_lexicon=False)
    pw.add_argument("--lexemes", required=True, help="lexeme TSV source for rebuilt lexicons")
    pw.add_argument("--M", default="1,2,3,4,5", help="comma-separated substitute counts (default %(default)s)")
    pw.add_argument("--pos", default="ADJ", help="keep only lexemes with this POS tag (default %(default)s)")
    pw.add_argument("--all-pos", action="store_true", help="disable the POS filter")
    _add_key_flags(pw)
    _add_verify_flags(pw)
    pw.add_argument("--config-out", help="write the JSON config echo here (default stderr)")
    pw.set_defaults(handler=cmd_simulate_m_sweep)

    p = sub.add_parser("serve", help="run the watermarking proxy service")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--listen", help="host:port to bind")
    p.add_argument("--lexicon", help="lexicon TSV path")
    p.add_argument("--upstream", help="'stub' or an upstream URL")
    p.add_argument("--key-env", dest="key_env_override", metavar="NAME", help="environment variable holding the hex key")
    p.add_argument("--key-file", metavar="PATH", help="file holding the hex key")
    p.add_argument("--timeout", type=float, help="upstream timeout in seconds")
    p.add_argument("--max-body", type=int, help="maximum request body bytes")
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse handled --help or a usage error
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"wordmark: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
