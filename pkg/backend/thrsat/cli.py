"""thrsat 命令列介面。

結束碼：判定類命令 YES 為 0、NO 為 1；超出列舉上限為 2；其餘可預期錯誤依 ThrsatError.exit_code；
未預期的例外記錄完整 stack trace 後以 5 結束。stdout 只輸出結果（JSON 或 DIMACS），日誌走 stderr。
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from thrsat.core import config
from thrsat.core.errors import InvalidConfig, ThrsatError
from thrsat.core.logging import setup_logging
from thrsat.schemas.common import err, ok
from thrsat.schemas.verdict import (
    AnalysisReport,
    FuzzReport,
    MsbReport,
    ReductionReport,
    verdict_report,
)
from thrsat.services.arithmetic import parse_threshold
from thrsat.services.combinatorics import extract_kcnf, maximal_disjoint_set
from thrsat.services.decomposition import Budget
from thrsat.services.formula import CnfFormula, normalize, parse_dimacs, serialize_dimacs
from thrsat.services.fuzz import FuzzPlan, plan_from_profile, run_fuzz, with_overrides
from thrsat.services.inference import decide_emaj2sat, decide_majmaj2sat
from thrsat.services.oracle import GeneratorConfig, brute_count, random_kcnf
from thrsat.services.reductions import REDUCTIONS, apply_reduction
from thrsat.services.solvers.dispatch import ALGORITHMS, decide
from thrsat.services.solvers.msb import msb_count
from thrsat.services.solvers.schedule import build_schedule
from thrsat.services.solvers.verdict import Verdict

logger = logging.getLogger(__name__)

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNEXPECTED = 5


# ============================================================
# helpers
# ============================================================

def _read_formula(path: Optional[str]) -> CnfFormula:
    if path in (None, "-"):
        return parse_dimacs(sys.stdin.buffer.read())
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidConfig(f"cannot read {path}: {exc.strerror}", {"path": path}) from exc
    return parse_dimacs(data)


def _budget(args: argparse.Namespace) -> Budget:
    cap = getattr(args, "budget_leaves", None)
    return Budget(cap=cap) if cap else Budget()


def _int_range(text: str) -> tuple[int, int]:
    """"12" 或 "4-12"。"""
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return int(lo), int(hi)
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None
    return value, value


def _emit(args: argparse.Namespace, data: Any, text: str) -> None:
    if args.json:
        print(json.dumps(ok(data), ensure_ascii=False, indent=2, default=str))
    else:
        print(text)


def _verdict_text(verdict: Verdict) -> str:
    lines = [f"{verdict.answer.value} ({verdict.branch_tag})"]
    report = verdict_report(verdict)
    cert = report.certificate
    if cert.count is not None:
        lines.append(f"count: {cert.count}")
    if cert.bound is not None:
        lines.append(f"bound: {cert.bound} over clauses {cert.witness_clauses}")
    if cert.hitting_set:
        lines.append(f"hitting set: {cert.hitting_set}")
    if verdict.good_assignment_count is not None:
        lines.append(f"good assignments: {verdict.good_assignment_count}")
    return "\n".join(lines)


def _answer_code(verdict: Verdict) -> int:
    return EXIT_YES if verdict.is_yes else EXIT_NO


# ============================================================
# commands
# ============================================================

def cmd_decide(args: argparse.Namespace) -> int:
    formula = _read_formula(args.file)
    rho = parse_threshold(args.rho)
    verdict = decide(
        formula,
        rho,
        algorithm=args.algorithm,
        gt=args.gt,
        budget=_budget(args),
        fallback_oracle=args.fallback_oracle,
    )
    report = verdict_report(verdict, gt=args.gt, with_tree=args.with_tree)
    _emit(args, report.model_dump(), _verdict_text(verdict))
    return _answer_code(verdict)


def cmd_msb(args: argparse.Namespace) -> int:
    formula = _read_formula(args.file)
    bits = msb_count(formula, args.bits, budget=_budget(args))
    report = MsbReport(num_vars=formula.num_vars, bits=list(bits))
    _emit(args, report.model_dump(), "".join(str(b) for b in bits))
    return 0


def cmd_emaj(args: argparse.Namespace) -> int:
    formula = _read_formula(args.file)
    verdict = decide_emaj2sat(formula, parse_threshold(args.rho), budget=_budget(args))
    _emit(args, verdict_report(verdict).model_dump(), _verdict_text(verdict))
    return _answer_code(verdict)


def cmd_majmaj(args: argparse.Namespace) -> int:
    formula = _read_formula(args.file)
    verdict = decide_majmaj2sat(
        formula,
        parse_threshold(args.rho),
        parse_threshold(args.sigma),
        budget=_budget(args),
    )
    _emit(args, verdict_report(verdict).model_dump(), _verdict_text(verdict))
    return _answer_code(verdict)


def _parse_q(text: str, k: int) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidConfig(f"--q must be comma separated integers, got {text!r}") from None
    if len(values) != k - 1 or any(v < 1 for v in values):
        raise InvalidConfig(f"--q needs {k - 1} positive values Q_0..Q_{k - 2}", {"q": values})
    return values


def cmd_analyze(args: argparse.Namespace) -> int:
    formula = normalize(_read_formula(args.file))
    k = args.k or max(formula.max_width, 2)
    budget = _budget(args)
    if args.q:
        q_values = _parse_q(args.q, k)
    else:
        schedule = build_schedule(
            parse_threshold(args.rho), k, cap=len(formula.clauses) + 1, family="thrk", budget=budget
        )
        q_values = schedule.extraction_q((0,) * (k - 2))
    disjoint = maximal_disjoint_set(formula)
    outcome = extract_kcnf(formula, q_values, budget)
    report = AnalysisReport.build(
        formula.num_vars,
        len(formula.clauses),
        formula.max_width,
        list(disjoint.clause_indices),
        q_values,
        outcome,
    )
    if outcome.sunflower is not None:
        text = f"sunflower: core={list(outcome.sunflower.core)} petals={list(outcome.sunflower.petal_indices)}"
    else:
        text = f"tree: leaves={report.tree['leaves']} count={report.exact_count}"
    _emit(args, report.model_dump(), f"disjoint set: {report.disjoint_set}\nQ: {q_values}\n{text}")
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    formula = _read_formula(args.file)
    options: dict[str, Any] = {}
    if args.name == "add-one-long-clause":
        if args.t is None:
            raise InvalidConfig("add-one-long-clause needs --t")
        options["t"] = args.t
    record = apply_reduction(args.name, formula, **options)
    dimacs = serialize_dimacs(record.output)

    verified: Optional[bool] = None
    if args.verify:
        if record.output.num_vars > config.ORACLE_MAX_VARS:
            raise InvalidConfig("output too large for --verify", {"n": record.output.num_vars})
        verified = record.holds(brute_count(formula).value, brute_count(record.output).value)
        logger.info("轉換 %s 的解數恆等式：%s", args.name, "成立" if verified else "不成立")

    report = ReductionReport.from_record(record, dimacs, verified)
    _emit(args, report.model_dump(), dimacs.rstrip("\n"))
    return 0 if verified is not False else EXIT_NO


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = GeneratorConfig(
        n=args.n,
        clause_count=args.m,
        k=args.k,
        seed=args.seed,
        role_split=args.role_split,
        width_mix=args.width_mix,
    )
    formula = random_kcnf(cfg)
    dimacs = serialize_dimacs(formula)
    _emit(args, {"dimacs": dimacs, "num_vars": formula.num_vars, "num_clauses": len(formula)}, dimacs.rstrip("\n"))
    return 0


def cmd_fuzz(args: argparse.Namespace) -> int:
    overrides = {
        "k": args.k,
        "n": args.n,
        "m": args.m,
        "thresholds": tuple(args.rho) if args.rho else None,
        "sigmas": tuple(args.sigma) if args.sigma else None,
        "decider": args.decider,
        "gt": True if args.gt else None,
        "count": args.count,
        "seed": args.seed,
        "fallback_oracle": True if args.fallback_oracle else None,
        "budget_leaves": args.budget_leaves,
    }
    if args.profile:
        plan = plan_from_profile(args.profile, **overrides)
    else:
        plan = with_overrides(FuzzPlan(), **overrides)
    summary = run_fuzz(plan, jobs=args.jobs)
    report = FuzzReport.from_summary(summary)

    lines = [
        f"decider={report.decider} instances={report.instances} completed={report.completed} "
        f"budget_exceeded={report.budget_exceeded} mismatches={len(report.mismatches)}",
        "branch tags: " + ", ".join(f"{tag}={n}" for tag, n in sorted(report.branch_tags.items())),
    ]
    for miss in report.mismatches:
        lines.append(f"--- instance {miss.index} rho={miss.rho} answer={miss.answer} expected={miss.expected}")
        lines.append(miss.dimacs.rstrip("\n"))
    _emit(args, report.model_dump(), "\n".join(lines))
    return 1 if report.mismatches else 0


# ============================================================
# parser
# ============================================================

def _add_common(parser: argparse.ArgumentParser, *, budget: bool = True) -> None:
    parser.add_argument("--json", action="store_true", help="以 {ok, data, error} JSON 輸出")
    if budget:
        parser.add_argument("--budget-leaves", type=int, default=None, help="列舉上限（覆蓋 THRSAT_BUDGET_LEAVES）")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thrsat", description="Threshold model counting for k-CNF formulas.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="#SAT(F) >= rho * 2^n ?")
    p.add_argument("file", nargs="?", default="-", help="DIMACS 檔案，省略或 - 表示 stdin")
    p.add_argument("--rho", required=True, help="門檻，限 p/q 形式")
    p.add_argument("--gt", action="store_true", help="改用嚴格不等式")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="auto")
    p.add_argument("--fallback-oracle", action="store_true", help="超出上限時改用暴力計數")
    p.add_argument("--with-tree", action="store_true", help="JSON 中附上決策樹")
    _add_common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("msb", help="#SAT(F) 的最高 t+1 個位元")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--bits", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_msb)

    p = sub.add_parser("emaj", help="E-MAJ-2SAT")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--rho", default="1/2")
    _add_common(p)
    p.set_defaults(func=cmd_emaj)

    p = sub.add_parser("majmaj", help="MAJ-MAJ-2SAT")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--rho", default="1/2")
    p.add_argument("--sigma", default="1/2")
    _add_common(p)
    p.set_defaults(func=cmd_majmaj)

    p = sub.add_parser("analyze", help="不相交集合與向日葵抽取結果")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--q", default=None, help="Q_0..Q_{k-2}，逗號分隔；省略時由 --rho 的參數表計算")
    p.add_argument("--rho", default="1/2")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reduce", help="套用公式轉換並輸出 DIMACS")
    p.add_argument("name", choices=sorted(REDUCTIONS))
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--verify", action="store_true", help="以暴力計數檢查解數恆等式")
    _add_common(p, budget=False)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen", help="產生可重現的隨機 k-CNF")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--role-split", type=int, default=None, help="前 N 個變數為存在變數")
    p.add_argument("--width-mix", action="store_true")
    _add_common(p, budget=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fuzz", help="與暴力計數比對")
    p.add_argument("--profile", default=None, help="resources/fuzz_profiles.yaml 中的名稱")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--n", type=_int_range, default=None, help="N 或 LO-HI")
    p.add_argument("--m", type=_int_range, default=None, help="N 或 LO-HI")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--rho", action="append", default=None, help="可重複指定")
    p.add_argument("--sigma", action="append", default=None)
    p.add_argument("--decider", default=None)
    p.add_argument("--gt", action="store_true")
    p.add_argument("--fallback-oracle", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except ThrsatError as exc:
        logger.error("%s 失敗：%s（%s）", args.command, exc.message, exc.code)
        if args.json:
            print(json.dumps(err(exc.code, exc.message, exc.details), ensure_ascii=False, indent=2, default=str))
        else:
            print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        logging.exception("%s 發生未預期的錯誤", args.command)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    raise SystemExit(main())
