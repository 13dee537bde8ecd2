"""
Inserting shadow statements into seeds and emitting UB programs.
"""
import copy
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pycparser import c_ast

from lang import build as B
from lang.exceptions import LangError
from lang.parser import parse_program
from lang.printer import print_node, print_program, reparse, statement_text
from lang.tree import Ast, SourceLoc
from match.kinds import UbKind
from match.sites import MatchSite, get_matched_exprs
from minivm.exceptions import VmError
from minivm.interpreter import eval_program
from minivm.outcomes import Ub
from profiler.exceptions import NotLive, ProfileError
from profiler.profile import ExecutionProfile, q_liv

from .exceptions import AnchorNotFound, NoEligibleTarget, SynthesisBudgetExhausted, SynthesisError
from .shadow import FreshNames, ShadowStmt, syn_shadow_stmt

logger = logging.getLogger(__name__)

NOT_LIVE = 'not-live'
NO_TARGET = 'no-eligible-target'
BUDGET = 'budget-exhausted'
FAILED = 'synthesis-failed'
MISMATCH = 'verification-mismatch'


@dataclass(frozen=True)
class UbProgram:
    source: str
    kind: UbKind
    planted_site: SourceLoc
    seed_id: str = ''
    shadow: str = ''
    seed_site: Optional[SourceLoc] = None
    planted_text: str = ''

    def meta(self) -> str:
        fields = {
            'kind': self.kind.value,
            'planted_site': str(self.planted_site),
            'seed_id': self.seed_id,
            'seed_site': str(self.seed_site) if self.seed_site else '',
            'shadow': self.shadow.replace('\n', ' '),
            'planted_text': self.planted_text,
        }
        return ''.join(f"{key}={value}\n" for key, value in fields.items())


@dataclass(frozen=True)
class Skip:
    site: MatchSite
    reason: str
    detail: str = ''


def read_meta(path) -> Dict[str, str]:
    fields = {}
    for line in Path(path).read_text().splitlines():
        if '=' in line:
            key, value = line.split('=', 1)
            fields[key.strip()] = value.strip()
    return fields


def load_program(path) -> UbProgram:
    """A program written by write_programs, with its sidecar."""
    path = Path(path)
    meta = read_meta(path.with_suffix('.meta'))
    return UbProgram(path.read_text(), UbKind.parse(meta['kind']), SourceLoc.parse(meta['planted_site']),
                     meta.get('seed_id', ''), meta.get('shadow', ''),
                     SourceLoc.parse(meta['seed_site']) if meta.get('seed_site') else None,
                     meta.get('planted_text', ''))


def _preorder(node):
    yield node
    for _, child in node.children():
        yield from _preorder(child)


def plant(ast: Ast, shadow: ShadowStmt) -> Tuple[str, Ast, SourceLoc, str]:
    """Text and tree of the program with the shadow statement in place, the planted site in it and
    the text of the statement holding that site."""
    if not 0 <= shadow.anchor < len(ast.nodes) or not ast.is_statement(shadow.anchor):
        raise AnchorNotFound(shadow.anchor)
    work = reparse(ast)
    anchor = work.node(shadow.anchor)
    parent = work.node(work.parent(shadow.anchor))
    target = work.node(shadow.target)
    target_parent = work.node(work.parent(shadow.target))

    planted = target
    for rewrite in shadow.rewrites:
        if rewrite.attr is None:
            planted = B.binop('+', target, B.ident(rewrite.aux))
            B.replace_child(target_parent, target, planted)
        else:
            setattr(target, rewrite.attr, B.binop('+', getattr(target, rewrite.attr), B.ident(rewrite.aux)))

    items = [copy.deepcopy(n) for n in shadow.decls + shadow.assigns]
    if isinstance(parent, c_ast.Compound):
        index = next(i for i, item in enumerate(parent.block_items) if item is anchor)
        parent.block_items[index:index] = items
    else:
        B.replace_child(parent, anchor, B.compound(items + [anchor]))

    position = next(i for i, node in enumerate(_preorder(work.unit)) if node is planted)
    expected = print_node(planted)
    text = print_program(work)
    try:
        emitted = parse_program(text)
    except LangError as exc:
        raise SynthesisError(f"program with shadow statement does not parse: {exc}") from exc
    if position >= len(emitted.nodes) or print_node(emitted.node(position)) != expected:
        raise SynthesisError(f"planted expression '{expected}' moved in the emitted program")
    return text, emitted, emitted.locate(position), statement_text(emitted, position)


def insert(ast: Ast, shadow: ShadowStmt) -> Ast:
    return plant(ast, shadow)[1]


def confirms(ast: Ast, kind: UbKind, site: SourceLoc) -> bool:
    """minivm reports kind at site as the program's first undefined behaviour."""
    try:
        outcome = eval_program(ast)
    except VmError as exc:
        logger.debug(f"verification run failed: {exc}")
        return False
    return isinstance(outcome, Ub) and outcome.kind == kind and outcome.site == site


def generate(seed: Ast, kind: UbKind, profile: ExecutionProfile, verify: bool = True,
             rng: Optional[random.Random] = None, seed_id: str = '',
             skips: Optional[List[Skip]] = None) -> List[UbProgram]:
    """One UB program per live site of kind whose shadow statement could be synthesized.

    Failures at a site are recorded in `skips` and never stop the batch.
    """
    rng = rng or random.Random(0)
    skips = skips if skips is not None else []
    programs = []
    for site in get_matched_exprs(seed, kind):
        if not q_liv(profile, site):
            skips.append(Skip(site, NOT_LIVE))
            continue
        try:
            shadow = syn_shadow_stmt(site, profile, kind, rng, FreshNames(seed))
            text, emitted, planted, planted_text = plant(seed, shadow)
        except NoEligibleTarget as exc:
            logger.debug(f"skipping {site}: {exc}")
            skips.append(Skip(site, NO_TARGET, str(exc)))
            continue
        except SynthesisBudgetExhausted as exc:
            logger.warning(f"skipping {site}: {exc}")
            skips.append(Skip(site, BUDGET, str(exc)))
            continue
        except NotLive as exc:
            skips.append(Skip(site, NOT_LIVE, str(exc)))
            continue
        except (SynthesisError, ProfileError) as exc:
            logger.warning(f"skipping {site}: {exc}")
            skips.append(Skip(site, FAILED, str(exc)))
            continue
        if verify and not confirms(emitted, kind, planted):
            logger.warning(f"{site}: {kind} program rejected by verification")
            skips.append(Skip(site, MISMATCH, shadow.summary))
            continue
        programs.append(UbProgram(text, kind, planted, seed_id, shadow.summary, site.loc, planted_text))
    logger.info(f"{seed_id or 'seed'}: {len(programs)} {kind} programs, {len(skips)} sites skipped")
    return programs


def write_programs(programs: List[UbProgram], root) -> List[Path]:
    """Write `<root>/<kind>/<n>.c` with a `<n>.meta` sidecar for each program."""
    root = Path(root)
    counters = {}
    paths = []
    for program in programs:
        n = counters.get(program.kind, 0)
        counters[program.kind] = n + 1
        directory = root / program.kind.value
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{n}.c"
        path.write_text(program.source)
        path.with_suffix('.meta').write_text(program.meta())
        paths.append(path)
    return paths
