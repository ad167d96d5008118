from __future__ import annotations

import pytest

from ptqlaw import (
    ValidationError,
    load_params_file,
    params_to_text,
    parse_params_text,
    registry_text,
    write_params_file,
)
from ptqlaw.model import ALL_FACTORS, Factor

EXPECTED_NAMES = (
    "opt-general",
    "opt-n-beff",
    "opt-n-g-beff",
    "opt-n-cb-beff",
    "opt-mem",
    "opt-util",
    "llama2-general",
    "llama2-mem",
    "llama2-util",
    "opt-2bit",
)

# name -> (task, mask, c, alpha, beta, gamma, delta); None marks an excluded factor
EXPECTED_VALUES = {
    "opt-general": ("general", "n,c_b,g,b_eff", 0.0255, 0.1016, 0.0706, -0.0035, 0.3188),
    "opt-n-beff": ("general", "n,b_eff", 0.0291, 0.1011, None, None, 0.3211),
    "opt-n-g-beff": ("general", "n,g,b_eff", 0.0295, 0.1012, None, -0.0034, 0.3198),
    "opt-n-cb-beff": ("general", "n,c_b,b_eff", 0.0251, 0.1015, 0.0705, None, 0.3201),
    "opt-mem": ("memorization", "n,c_b,g,b_eff", 2.37e-4, 0.2373, 0.1576, -0.0036, 0.7900),
    "opt-util": ("utilization", "n,c_b,g,b_eff", 5.13e-2, 0.0862, 0.0601, -0.0036, 0.2561),
    "llama2-general": ("general", "n,c_b,g,b_eff", 2.07e-2, 0.0996, 0.0270, 0.0066, 0.7266),
    "llama2-mem": ("memorization", "n,c_b,g,b_eff", 1.38e-3, 0.1118, 0.0330, 0.0051, 1.7315),
    "llama2-util": ("utilization", "n,c_b,g,b_eff", 3.52e-2, 0.0898, 0.0232, 0.0095, 0.6568),
    "opt-2bit": ("general", "n,c_b,g", 2.4915e-2, 0.1085, 0.1748, -0.0904, None),
}


class TestRegistryContents:
    def test_exactly_the_published_fits(self, registry):
        assert registry.names() == EXPECTED_NAMES
        assert len(registry) == len(EXPECTED_NAMES)

    @pytest.mark.parametrize("name", EXPECTED_NAMES)
    def test_values(self, registry, name):
        task, mask_text, c, alpha, beta, gamma, delta = EXPECTED_VALUES[name]
        params = registry.get(name)
        assert params.task == task
        from ptqlaw import mask_to_text, parse_mask

        assert params.mask == parse_mask(mask_text)
        assert mask_to_text(params.mask) == mask_text
        assert params.c == c
        for value, field in ((alpha, "alpha"), (beta, "beta"), (gamma, "gamma"), (delta, "delta")):
            if value is None:
                assert getattr(params, field) == 0.0
            else:
                assert getattr(params, field) == value

    def test_every_entry_has_provenance(self, registry):
        for entry in registry.entries():
            assert entry.provenance.strip()

    def test_unknown_preset_lists_available(self, registry):
        with pytest.raises(ValidationError, match="opt-general"):
            registry.get("nope")


class TestRegistryFile:
    def test_raw_literals_preserved(self):
        # the shipped file must carry the published decimal spellings verbatim
        text = registry_text()
        for literal in (
            "c = 0.0255",
            "c = 0.0291",
            "c = 0.0295",
            "c = 0.0251",
            "c = 2.37e-4",
            "c = 5.13e-2",
            "c = 2.07e-2",
            "c = 1.38e-3",
            "c = 3.52e-2",
            "c = 2.4915e-2",
            "delta = 0.7900",
            "delta = 1.7315",
            "gamma = -0.0904",
        ):
            assert literal in text, literal

    def test_mem_util_share_g_exponent(self, registry):
        assert registry.get("opt-mem").gamma == registry.get("opt-util").gamma == -0.0036


class TestParamsFormat:
    def test_round_trip_identical_values(self, registry):
        for name in EXPECTED_NAMES:
            params = registry.get(name)
            reparsed = parse_params_text(params_to_text(params))
            assert reparsed == params

    def test_write_load_write_is_stable(self, tmp_path, registry):
        path = tmp_path / "params.txt"
        write_params_file(registry.get("opt-mem"), path)
        first = path.read_bytes()
        write_params_file(load_params_file(path), path)
        assert path.read_bytes() == first

    def test_fit_diagnostics_are_ignored_on_parse(self, registry):
        params = registry.get("opt-general")
        text = params_to_text(params, extras={"r_squared": 0.9, "converged": "true"})
        assert parse_params_text(text) == params

    def test_mask_inferred_from_exponents(self):
        params = parse_params_text("c = 0.1\nalpha = 0.2\n")
        assert params.mask == frozenset({Factor.N})
        assert params.alpha == 0.2

    def test_constant_only_file(self):
        params = parse_params_text("task = custom\nmask = none\nc = 0.42\n")
        assert params.mask == frozenset()
        assert params.c == 0.42

    @pytest.mark.parametrize(
        "text,match",
        [
            ("alpha = 0.2\n", "missing required key 'c'"),
            ("c = 0.1\nc = 0.2\n", "duplicate key"),
            ("c 0.1\n", "expected 'key = value'"),
            ("c = abc\n", "not a number"),
            ("[a]\nc = 0.1\n[b]\nc = 0.2\n", "single parameter block"),
            ("c = 0.1\nalpha = 0.2\nmask = g\n", "not in the mask"),
        ],
    )
    def test_malformed_files_rejected(self, text, match):
        with pytest.raises(ValidationError, match=match):
            parse_params_text(text)

    def test_full_mask_text_round_trip(self, registry):
        params = registry.get("opt-general")
        text = params_to_text(params)
        assert "mask = n,c_b,g,b_eff" in text
        assert parse_params_text(text).mask == ALL_FACTORS
