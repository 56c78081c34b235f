import json

import pytest

from app.cli.dto import RunOptions
from app.exception.bundle_error import BundleError, UnknownPresheaf
from app.services.workbench import WorkbenchService
from app.storage.bundle import BundleRepository
from clients.bundle_file import BundleFile


@pytest.fixture(scope="module")
def repo():
    return BundleRepository(BundleFile())


@pytest.fixture(scope="module")
def service(repo):
    return WorkbenchService(repo)


@pytest.fixture
def options():
    return RunOptions(max_family=None, seed=0, transformation_bound=4096)


def test_check_laws_finset_p(service, options):
    result = service.check_laws("finset_p_2", options)
    assert result.report.lines() == []
    assert result.checks == {"category": True, "restriction": True, "join": True}
    assert result.ok


def test_check_laws_nojoin(service, options):
    result = service.check_laws("nojoin", options)
    assert not result.ok
    assert result.checks["restriction"]
    assert result.checks["join"] is False
    assert "JOIN" in result.report.tags()


def test_check_laws_runs_par_of_m_category(service, options):
    result = service.check_laws("finset_inj_2", options)
    assert result.ok
    assert result.checks["m_system"]
    assert result.checks["par_restriction"]
    assert result.checks["par_join"]
    assert "restriction" not in result.checks


def test_check_laws_reports_non_functorial_presheaf(service, options, tmp_path):
    bundle = {
        "objects": ["A", "B"],
        "morphisms": [
            {"id": "1_A", "src": "A", "tgt": "A"},
            {"id": "1_B", "src": "B", "tgt": "B"},
            {"id": "f", "src": "A", "tgt": "B"},
            {"id": "s", "src": "A", "tgt": "A"},
        ],
        "identities": {"A": "1_A", "B": "1_B"},
        "comp": [["s", "s", "1_A"], ["f", "s", "f"]],
        "presheaves": {
            # P(s)∘P(s) должно быть тождеством, а здесь оно постоянно
            "P": {"sections": {"A": ["a", "b"], "B": []}, "action": {"s": {"a": "a", "b": "a"}}},
        },
    }
    path = tmp_path / "swap.json"
    path.write_text(json.dumps(bundle))
    result = service.check_laws(str(path), options)
    assert result.subject == "swap"
    assert result.checks["category"]
    assert result.checks["presheaf:P"] is False
    assert not result.ok


def test_build_par_of_finset_inj(service, repo, options):
    result = service.build_par("finset_inj_2", options)
    assert result.ok
    assert result.checks["finset_p_isomorphic"]
    assert result.checks["leq_oracle"]
    assert result.details == {"objects": 3, "morphisms": 23}
    built = repo.parse("par.json", result.artifacts["par"])
    assert built.restriction is not None
    assert len(built.category.morphisms) == 23


def test_build_par_of_restriction_bundle_uses_total_maps(service, options):
    result = service.build_par("finset_p_1", options)
    assert result.ok
    assert "finset_p_isomorphic" not in result.checks


def test_karoubi_of_finset_p(service, options):
    result = service.karoubi("finset_p_1", options)
    assert result.ok
    assert result.details["source_has_joins"]
    assert result.checks["join"]
    assert "karoubi" in result.artifacts


def test_karoubi_without_joins(service, options):
    result = service.karoubi("nojoin", options)
    assert result.details["source_has_joins"] is False
    assert "join" not in result.checks
    assert result.checks["split"]
    assert result.checks["fully_faithful"]


def test_geometric_finset_inj(service, options):
    result = service.geometric("finset_inj_2", options)
    assert result.report.lines() == []
    assert set(result.checks) == {"category", "m_system", "geometric", "heyting", "pullback_joins", "join_recipe"}


def test_geometric_finset_iso(service, options):
    result = service.geometric("finset_iso_2", options)
    assert not result.ok
    assert result.checks["geometric"] is False
    assert "G-INDUCED" in result.report.tags()
    assert "heyting" not in result.checks


def test_topology_finset_inj(service, options):
    result = service.topology("finset_inj_2", options)
    assert result.ok
    assert result.checks["subcanonical"]
    dump = json.loads(result.artifacts["topology"])
    assert set(dump["covers"]) == {"0", "1", "2"}
    # начальный объект покрывается пустым решетом
    assert [] in dump["covers"]["0"]


def test_topology_needs_geometric_category(service, options):
    result = service.topology("finset_iso_2", options)
    assert not result.ok
    assert "topology" not in result.checks


def test_topology_without_split_monics(service, options):
    with pytest.raises(BundleError) as e:
        service.topology("nojoin", options)
    assert e.value.location == "monics"


@pytest.mark.parametrize("presheaf, ok", [("y2", True), ("yD", True), ("terminal", True), ("const2", False)])
def test_sheaf_check(service, options, presheaf, ok):
    result = service.sheaf_check("finset_inj_2", presheaf, options)
    assert result.ok == ok
    assert result.checks["sheaf"] == ok
    assert result.subject.endswith(presheaf)


def test_sheaf_check_unknown_presheaf(service, options):
    with pytest.raises(UnknownPresheaf):
        service.sheaf_check("finset_inj_2", "Q", options)


def test_sheafify_constant_presheaf(service, repo, options):
    result = service.sheafify("finset_inj_2", "const2", options)
    assert result.ok
    assert result.details["input_is_sheaf"] is False
    assert result.details["sheaf_sizes"] != result.details["sizes"]
    sheaf = repo.parse("sheaf.json", result.artifacts["sheaf"])
    assert len(sheaf.presheaves) == 1


def test_sheafify_sheaf_keeps_it(service, options):
    result = service.sheafify("finset_inj_2", "y1", options)
    assert result.ok
    assert result.details["input_is_sheaf"]
    assert result.details["sheaf_sizes"] == result.details["sizes"]


def test_transfer_sheaf_to_jrp(service, repo, options):
    result = service.transfer("finset_inj_2", "y2", "to-jrp", options)
    assert result.ok
    assert result.checks["jrp_axioms"]
    jrp = repo.parse("jrp.json", result.artifacts["jrp"])
    assert jrp.restriction is not None
    assert len(jrp.restriction_presheaves) == 1


def test_transfer_non_sheaf_stops(service, options):
    result = service.transfer("finset_inj_2", "const2", "to-jrp", options)
    assert not result.ok
    assert result.checks["sheaf"] is False
    assert "SHEAF" in result.report.tags()
    assert "jrp" not in result.artifacts


def test_transfer_jrp_to_sheaf(service, options):
    result = service.transfer("finset_inj_2", "y1", "to-sheaf", options)
    assert result.ok
    assert result.details["formula_agrees"] == result.details["amalgamations"]
    assert "sheaf" in result.artifacts


@pytest.mark.parametrize("direction", ["to-jrp", "to-sheaf"])
def test_roundtrip_representable(service, options, direction):
    result = service.roundtrip("finset_inj_2", "yD", direction, options)
    assert result.ok
    assert result.details["direction"] == direction
    assert result.details["witness"] is not None


def test_roundtrip_over_total_maps(service, options):
    result = service.roundtrip("finset_p_1", "y1", "to-jrp", options)
    assert result.ok
    assert result.checks["roundtrip_iso"]


def test_roundtrip_non_sheaf_has_no_witness(service, options):
    result = service.roundtrip("finset_inj_2", "const2", "to-jrp", options)
    assert not result.ok
    assert result.details["witness"] is None


def test_unit_of_finset_p(service, options):
    result = service.unit("finset_p_1", options)
    assert result.ok
    assert set(result.details["witnesses"]) == {"0", "1"}


def test_unit_of_m_category_goes_through_par(service, options):
    result = service.unit("finset_inj_1", options)
    assert result.ok


@pytest.mark.parametrize("source", ["finset_p_1", "finset_iso_1", "nojoin"])
def test_dump_is_deterministic(service, options, source):
    first = service.dump(source, options).artifacts["bundle"]
    assert service.dump(source, options).artifacts["bundle"] == first
