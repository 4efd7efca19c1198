import pytest
from hypothesis import given

from archsubst.errors import WellFormednessError
from archsubst.model import (
    ConfigurationDeclaration,
    Identifier,
    PType,
    config_equal,
    format_value,
    new_configuration,
)

from strategies import configurations


def http_declaration():
    comps = ["RequestReceiver", "RequestHandler", "CacheHandler", "RequestDispatcher", "FileServer1", "FileServer2"]
    prov = {"rr_http": "RequestReceiver", "rh_handle": "RequestHandler", "ch_cache": "CacheHandler",
            "rd_dispatch": "RequestDispatcher", "fs1_file": "FileServer1", "fs2_file": "FileServer2"}
    req = {"rr_handle": "RequestReceiver", "rh_cache": "RequestHandler", "rh_dispatch": "RequestHandler",
           "rd_fs1": "RequestDispatcher", "rd_fs2": "RequestDispatcher"}
    params = {"load": "RequestHandler", "deviation": "RequestHandler",
              "memorySize": "CacheHandler", "validityDuration": "CacheHandler"}
    types = {"rr_http": "IHttp", "rh_handle": "IHandle", "rr_handle": "IHandle", "ch_cache": "ICache",
             "rh_cache": "ICache", "rd_dispatch": "IDispatch", "rh_dispatch": "IDispatch",
             "fs1_file": "IFile", "fs2_file": "IFile", "rd_fs1": "IFile", "rd_fs2": "IFile",
             "load": "Percent", "deviation": "Percent", "memorySize": "Level", "validityDuration": "Level"}
    return ConfigurationDeclaration(
        components=comps,
        prov_interfaces=list(prov),
        req_interfaces=list(req),
        parameters=list(params),
        itypes=["IHttp", "IHandle", "ICache", "IDispatch", "IFile"],
        ptypes={"Percent": PType.int_range(0, 100), "Level": PType.int_range(1, 3)},
        container={**prov, **req, **params},
        container_type=types,
        binding={"rh_handle": "rr_handle", "rd_dispatch": "rh_dispatch", "ch_cache": "rh_cache",
                 "fs1_file": "rd_fs1", "fs2_file": "rd_fs2"},
        state={c: "started" for c in comps},
        contingency={"rr_handle": "mandatory", "rh_cache": "optional", "rh_dispatch": "mandatory",
                     "rd_fs1": "mandatory", "rd_fs2": "optional"},
        value={"load": 40, "deviation": 30, "memorySize": 2, "validityDuration": 2},
    )


def test_http_declaration_is_well_formed():
    c = new_configuration(http_declaration())
    assert len(c.components) == 6
    assert c.parameters == {"load", "deviation", "memorySize", "validityDuration"}
    assert c.provided_of("CacheHandler") == ["ch_cache"]
    assert c.params_of("RequestHandler") == ["deviation", "load"]
    assert not c.is_composite("RequestHandler")


def test_empty_component_set_is_rejected():
    with pytest.raises(WellFormednessError):
        new_configuration(ConfigurationDeclaration())


def test_interface_without_container_is_rejected():
    decl = http_declaration()
    decl.prov_interfaces.append("orphan")
    decl.container_type["orphan"] = "IHttp"
    with pytest.raises(WellFormednessError) as err:
        new_configuration(decl)
    assert "orphan" in err.value.ids


def test_binding_must_be_a_partial_function():
    decl = http_declaration()
    decl.binding = list(decl.binding.items()) + [("ch_cache", "rd_fs2")]
    with pytest.raises(WellFormednessError) as err:
        new_configuration(decl)
    assert err.value.ids == ("ch_cache",)


def test_value_outside_domain_is_rejected():
    decl = http_declaration()
    decl.value["memorySize"] = 4
    with pytest.raises(WellFormednessError):
        new_configuration(decl)


def test_element_groups_are_disjoint():
    decl = http_declaration()
    decl.itypes.append("CacheHandler")
    with pytest.raises(WellFormednessError):
        new_configuration(decl)


def test_bool_and_int_values_are_not_confused():
    t = PType.int_range(0, 1)
    assert t.contains(1) and not t.contains(True)
    assert PType.boolean().contains(False) and not PType.boolean().contains(0)
    assert format_value(True) == "true" and format_value(3) == "3"


def test_ptype_rendering():
    assert str(PType.int_range(1, 3)) == "[1..3]"
    assert str(PType.enum("a", "b")) == "{a, b}"
    with pytest.raises(ValueError):
        PType.int_range(3, 1)
    with pytest.raises(ValueError):
        PType.enum("true")


def test_identifier_rendering_and_order():
    assert str(Identifier("pre", "CacheHandler")) == "pre:CacheHandler"
    assert str(Identifier.of("x")) == "x"
    assert Identifier("post", "a") < Identifier("pre", "a")
    with pytest.raises(ValueError):
        Identifier("elsewhere", "x")


@given(configurations())
def test_equality_ignores_declaration_order(c):
    decl = c.to_declaration()
    decl.components = list(reversed(decl.components))
    decl.binding = list(reversed(list(decl.binding.items())))
    other = new_configuration(decl)
    assert other == c and hash(other) == hash(c) and config_equal(other, c)
    assert other.digest == c.digest


@given(configurations())
def test_container_partitions_holders(c):
    owned = [x for comp in c.components for x in c.interfaces_of(comp) + c.params_of(comp)]
    assert sorted(owned) == sorted(c.interfaces | c.parameters)
