from __future__ import annotations

import logging
from itertools import product
from typing import Literal, Optional

from app.cli.dto import CommandResult, RunOptions
from app.cli.serializers import TopologyDump, TransferWitness
from app.entities.bridge import cocompletion_unit, f_tilde, jrp_to_sheaf, roundtrip_report, sheaf_to_jrp
from app.entities.bundle import Workspace
from app.entities.category import validate_category
from app.entities.fixtures import build_finset_p
from app.entities.join import check_join_axioms, compatible_families, join_of
from app.entities.law_report import LawReport
from app.entities.mcategory import MCategory, check_m_system, heyting_check, is_geometric, pullback_preserves_joins
from app.entities.par import (
    ParCategory,
    is_fully_faithful,
    karoubi_embedding,
    karoubi_r,
    mtotal,
    mtotal_embedding,
    par,
    par_join_construction,
    par_leq_oracle,
)
from app.entities.presheaf import (
    NatTrans,
    Presheaf,
    check_functorial,
    check_natural,
    is_nat_iso,
    representable,
    restrict_along,
)
from app.entities.restriction import (
    RestrictionCategory,
    check_idempotents_split,
    check_restriction_axioms,
    find_restriction_isomorphism,
    leq,
)
from app.entities.restriction_presheaf import (
    JoinRestrictionPresheaf,
    check_hom_restriction_axioms,
    check_jrp_axioms,
    check_rp_axioms,
    yoneda_jr,
)
from app.entities.site import (
    Topology,
    check_topology,
    generate_topology,
    is_separated,
    is_sheaf,
    sheaf_report,
    sheafify,
)
from app.exception.bundle_error import BundleError
from app.exception.domain_error import NotASheaf, UnsplitIdempotent
from app.storage.bundle import BundleRepository

logger = logging.getLogger(__name__)

Direction = Literal["to-jrp", "to-sheaf"]


def _witness(witness: Optional[tuple[NatTrans, NatTrans]]) -> Optional[dict]:
    if witness is None:
        return None
    forward, backward = witness
    return TransferWitness(
        forward=[list(row) for row in forward.components],
        backward=[list(row) for row in backward.components],
    ).model_dump()


class WorkbenchService(object):
    """Один метод на подкоманду CLI; нарушения законов копятся в CommandResult, не бросаются"""

    def __init__(self, repository: BundleRepository):
        self.repository = repository

    def _mcategory(self, workspace: Workspace) -> MCategory:
        """Секция monics, иначе MTotal ограничения бандла"""
        if workspace.mcategory is not None:
            return workspace.mcategory
        if workspace.restriction is None:
            raise BundleError(workspace.source, "monics", "нужна секция monics или restriction")
        try:
            return mtotal(workspace.restriction)
        except UnsplitIdempotent as e:
            raise BundleError(workspace.source, "monics", f"секции нет, а MTotal построить нельзя: {e}")

    def _restriction(self, workspace: Workspace) -> RestrictionCategory:
        """Секция restriction, иначе Par от секции monics"""
        if workspace.restriction is not None:
            return workspace.restriction
        if workspace.mcategory is None:
            raise BundleError(workspace.source, "restriction", "нужна секция restriction или monics")
        return par(workspace.mcategory)

    def _open(self, command: str, source: str, options: RunOptions) -> tuple[Workspace, CommandResult]:
        workspace = self.repository.load(source, options.seed)
        result = CommandResult(command=command, subject=workspace.name)
        result.record("category", validate_category(workspace.category))
        logger.info("%s on %s", command, workspace.name)
        return workspace, result

    def _site(
            self, workspace: Workspace, result: CommandResult, options: RunOptions
    ) -> Optional[tuple[MCategory, Topology]]:
        """M-категория бандла и ее топология; для негеометрической в отчет идет причина"""
        mc = self._mcategory(workspace)
        if not result.record("m_system", check_m_system(mc)):
            return None
        if not result.record("geometric", is_geometric(mc, options.max_family)):
            return None
        return mc, generate_topology(mc, options.max_family)

    def _site_presheaf(self, workspace: Workspace, mc: MCategory, name: str) -> Presheaf:
        """Предпучок над базой M-категории; предпучок X из бандла ограничивается на Total(X)"""
        if workspace.mcategory is not None or name not in workspace.presheaves:
            return self.repository.resolve_presheaf(workspace, name, mc.base)
        embed = mtotal_embedding(workspace.restriction, mc)
        p = restrict_along(workspace.presheaves[name], mc.base, embed.on_objects, embed.on_morphisms)
        return p.model_copy(update={"name": name})

    def _join_presheaf(
            self, workspace: Workspace, mc: MCategory, pc: ParCategory, name: str, options: RunOptions
    ) -> JoinRestrictionPresheaf:
        """y<obj> это y_jr в Par, любое другое имя берется как P и переносится в P̃"""
        d = self.repository.representable_object(workspace, name)
        if d is not None:
            return yoneda_jr(pc, d, options.max_family)
        return f_tilde(self._site_presheaf(workspace, mc, name), pc)

    def _restriction_laws(self, result: CommandResult, x: RestrictionCategory, options: RunOptions, prefix: str):
        if result.record(f"{prefix}restriction", check_restriction_axioms(x)):
            result.record(f"{prefix}join", check_join_axioms(x, options.max_family))

    def check_laws(self, source: str, options: RunOptions) -> CommandResult:
        """Законы категории, R1–R4 и J1–J2, M-система и Par, предпучки бандла (RP, JRP, ограничение на Nat)"""
        workspace, result = self._open("check-laws", source, options)
        if not result.ok:
            return result
        if workspace.restriction is not None:
            self._restriction_laws(result, workspace.restriction, options, "")
        if workspace.mcategory is not None and result.record("m_system", check_m_system(workspace.mcategory)):
            self._restriction_laws(result, par(workspace.mcategory), options, "par_")

        for name, p in workspace.presheaves.items():
            result.record(f"presheaf:{name}", check_functorial(p))
        if not result.checks.get("restriction", False):
            return result
        for name, rp in workspace.restriction_presheaves.items():
            if not result.record(f"rp:{name}", check_rp_axioms(rp)):
                continue
            jrp = JoinRestrictionPresheaf(presheaf=rp.presheaf, category=rp.category, element_bar=rp.element_bar)
            result.record(f"jrp:{name}", check_jrp_axioms(jrp, options.max_family))
            result.record(
                f"hom_restriction:{name}",
                check_hom_restriction_axioms(rp, rp, options.transformation_bound, options.seed),
            )
        return result

    def build_par(self, source: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("build-par", source, options)
        if not result.ok:
            return result
        mc = self._mcategory(workspace)
        if not result.record("m_system", check_m_system(mc)):
            return result
        pc = par(mc)
        self._restriction_laws(result, pc, options, "")

        oracle = LawReport(subject=f"order {pc.name}")
        c = pc.base
        for a, b in product(c.object_ids(), repeat=2):
            for s, t in product(c.hom(a, b), repeat=2):
                if par_leq_oracle(mc, pc.span(s), pc.span(t)) != leq(pc, s, t):
                    oracle.add("PAR-LEQ", s, t)
        result.record("leq_oracle", oracle)

        spec = workspace.spec
        if spec is not None and spec.kind == "finset_inj":
            found = find_restriction_isomorphism(pc, build_finset_p(spec.size))
            result.checks["finset_p_isomorphic"] = found is not None

        result.details = {"objects": len(c.objects), "morphisms": len(c.morphisms)}
        result.artifacts["par"] = self.repository.dump(self.repository.to_bundle(c, restriction=pc))
        return result

    def karoubi(self, source: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("karoubi", source, options)
        if not result.ok:
            return result
        x = self._restriction(workspace)
        k = karoubi_r(x)
        result.record("restriction", check_restriction_axioms(k))
        result.record("split", check_idempotents_split(k))
        result.checks["fully_faithful"] = is_fully_faithful(karoubi_embedding(k))
        # K_r сохраняет joins, только если они были
        source_joins = check_join_axioms(x, options.max_family).ok
        if source_joins:
            result.record("join", check_join_axioms(k, options.max_family))
        result.details = {
            "objects": list(k.base.objects),
            "morphisms": len(k.base.morphisms),
            "source_has_joins": source_joins,
        }
        result.artifacts["karoubi"] = self.repository.dump(self.repository.to_bundle(k.base, restriction=k))
        return result

    def geometric(self, source: str, options: RunOptions) -> CommandResult:
        """Критерий геометричности, гейтинговость Sub_M и совпадение joins в Par с построением (μ, γ)"""
        workspace, result = self._open("geometric", source, options)
        if not result.ok:
            return result
        mc = self._mcategory(workspace)
        if not result.record("m_system", check_m_system(mc)):
            return result
        if not result.record("geometric", is_geometric(mc, options.max_family)):
            return result

        c = mc.base
        heyting = LawReport(subject=f"heyting {mc.name}")
        for a in c.object_ids():
            heyting.extend(heyting_check(mc, a, options.max_family))
        result.record("heyting", heyting)
        pulled = LawReport(subject=f"pullback joins {mc.name}")
        for f in c.morphism_ids():
            pulled.extend(pullback_preserves_joins(mc, f, options.max_family))
        result.record("pullback_joins", pulled)

        pc = par(mc)
        recipe = LawReport(subject=f"join recipe {pc.name}")
        for a, b in product(pc.base.object_ids(), repeat=2):
            for members in compatible_families(pc, a, b, options.max_family):
                ordered = sorted(members)
                if join_of(pc, a, b, ordered) != par_join_construction(pc, a, b, ordered):
                    recipe.add("PAR-JOIN-RECIPE", *ordered, note=f"hom({a},{b})")
        result.record("join_recipe", recipe)
        return result

    def topology(self, source: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("topology", source, options)
        if not result.ok:
            return result
        site = self._site(workspace, result, options)
        if site is None:
            return result
        _, j = site
        c = j.category
        result.record("topology", check_topology(j))
        subcanonical = LawReport(subject=f"subcanonical {j.name}")
        for a in c.object_ids():
            if not is_sheaf(representable(c, a), j):
                subcanonical.add("SUBCANONICAL", a)
        result.record("subcanonical", subcanonical)

        names = [m.name or str(m.id) for m in c.morphisms]
        dump = TopologyDump(
            name=j.name,
            covers={obj: [[names[f] for f in sieve] for sieve in j.covers[a]] for a, obj in enumerate(c.objects)},
        )
        result.details = {"covering_sieves": {obj: len(j.covers[a]) for a, obj in enumerate(c.objects)}}
        result.artifacts["topology"] = dump.model_dump_json(indent=2)
        return result

    def sheaf_check(self, source: str, presheaf: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("sheaf-check", source, options)
        if not result.ok:
            return result
        site = self._site(workspace, result, options)
        if site is None:
            return result
        mc, j = site
        p = self._site_presheaf(workspace, mc, presheaf)
        result.subject = f"{workspace.name}/{p.name}"
        if not result.record("functorial", check_functorial(p)):
            return result
        result.checks["separated"] = is_separated(p, j)
        result.record("sheaf", sheaf_report(p, j))
        result.details = {"sizes": list(p.sizes)}
        return result

    def sheafify(self, source: str, presheaf: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("sheafify", source, options)
        if not result.ok:
            return result
        site = self._site(workspace, result, options)
        if site is None:
            return result
        mc, j = site
        p = self._site_presheaf(workspace, mc, presheaf)
        result.subject = f"{workspace.name}/{p.name}"
        if not result.record("functorial", check_functorial(p)):
            return result
        s = sheafify(p, j)
        was_sheaf = is_sheaf(p, j)
        result.record("result_is_sheaf", sheaf_report(s.sheaf, j))
        result.checks["unit_natural"] = check_natural(s.unit).ok
        # единица обратима ровно на пучках
        result.checks["unit_iso_iff_sheaf"] = is_nat_iso(s.unit) == was_sheaf
        result.details = {
            "input_is_sheaf": was_sheaf,
            "sizes": list(p.sizes),
            "sheaf_sizes": list(s.sheaf.sizes),
            "unit": [list(row) for row in s.unit.components],
        }
        result.artifacts["sheaf"] = self.repository.dump(self.repository.to_bundle(mc.base, presheaves=[s.sheaf]))
        return result

    def transfer(self, source: str, presheaf: str, direction: Direction, options: RunOptions) -> CommandResult:
        workspace, result = self._open("transfer", source, options)
        if not result.ok:
            return result
        site = self._site(workspace, result, options)
        if site is None:
            return result
        mc, j = site
        pc = par(mc)

        if direction == "to-jrp":
            p = self._site_presheaf(workspace, mc, presheaf)
            result.subject = f"{workspace.name}/{p.name}"
            try:
                q = sheaf_to_jrp(p, pc, j, options.max_family)
            except NotASheaf as e:
                logger.info("transfer stopped: %s", e)
                report = LawReport(subject=f"sheaf {p.name}")
                report.add("SHEAF", e.object_id, *e.sieve, note=f"family {list(e.family)}")
                result.record("sheaf", report)
                return result
            result.checks["sheaf"] = True
            result.record("jrp_axioms", check_jrp_axioms(q, options.max_family))
            result.details = {"sizes": list(q.presheaf.sizes), "stored_joins": len(q.joins)}
            result.artifacts["jrp"] = self.repository.dump(
                self.repository.to_bundle(pc.base, restriction=pc, presheaves=[q])
            )
            return result

        q = self._join_presheaf(workspace, mc, pc, presheaf, options)
        result.subject = f"{workspace.name}/{q.name}"
        certificate = jrp_to_sheaf(q, pc, j)
        result.record("sheaf", certificate.report)
        result.details = {
            "sizes": list(certificate.presheaf.sizes),
            "amalgamations": len(certificate.amalgamations),
            "formula_agrees": sum(1 for found in certificate.amalgamations if found.searched == (found.formula,)),
        }
        result.artifacts["sheaf"] = self.repository.dump(
            self.repository.to_bundle(mc.base, presheaves=[certificate.presheaf])
        )
        return result

    def roundtrip(self, source: str, presheaf: str, direction: Direction, options: RunOptions) -> CommandResult:
        workspace, result = self._open("roundtrip", source, options)
        if not result.ok:
            return result
        site = self._site(workspace, result, options)
        if site is None:
            return result
        mc, j = site
        pc = par(mc)
        if direction == "to-jrp":
            subject: Presheaf | JoinRestrictionPresheaf = self._site_presheaf(workspace, mc, presheaf)
        else:
            subject = self._join_presheaf(workspace, mc, pc, presheaf, options)
        transfer = roundtrip_report(subject, pc, j, options.max_family)
        result.subject = f"{workspace.name}/{transfer.presheaf}"
        result.report.extend(transfer.report)
        result.checks.update(transfer.checks)
        result.details = {"direction": transfer.direction, "witness": _witness(transfer.witness)}
        return result

    def unit(self, source: str, options: RunOptions) -> CommandResult:
        workspace, result = self._open("unit", source, options)
        if not result.ok:
            return result
        x = self._restriction(workspace)
        unit = cocompletion_unit(x, options.max_family)
        result.record("unit", unit.report)
        c = x.base
        result.details = {
            "witnesses": {
                c.objects[w.object]: {
                    "searched": w.searched,
                    "comparison": [list(row) for row in w.comparison.components],
                }
                for w in unit.witnesses
            }
        }
        return result

    def dump(self, source: str, options: RunOptions) -> CommandResult:
        """Канонический текст бандла (для фикстур побайтно одинаковый при одинаковой спецификации)"""
        workspace = self.repository.load(source, options.seed)
        result = CommandResult(command="dump", subject=workspace.name)
        result.artifacts["bundle"] = self.repository.dump_workspace(workspace)
        return result
