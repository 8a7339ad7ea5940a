import builtins
import json
import random

import pytest

from groupauth import files, fixtures
from groupauth.cli import run_cli
from groupauth.errors import SchemaError
from groupauth.nscrypt import keygen
from groupauth.protocol import ResponseVector, Verdict, make_challenge


class TestSchemas:
    def test_key_roundtrip(self, tmp_path):
        pub, priv = keygen(12, force_p=fixtures.AIRPLANE_P, force_s=fixtures.AIRPLANE_S)
        files.save(pub, tmp_path / "pub.json")
        files.save(priv, tmp_path / "priv.json")
        assert files.load(tmp_path / "pub.json", expect_kind="ns-public") == pub
        assert files.load(tmp_path / "priv.json", expect_kind="ns-private") == priv

    def test_integers_are_decimal_strings(self, tmp_path):
        pub, _ = keygen(12, force_p=fixtures.AIRPLANE_P, force_s=fixtures.AIRPLANE_S)
        doc = json.loads(files.dumps(pub))
        assert doc["p"] == "7420738134871"
        assert all(isinstance(x, str) and x.isdigit() for x in doc["v"])

    def test_share_roundtrips(self, tmp_path, airplane, small):
        seq = airplane.shares["A"]
        files.save(seq, tmp_path / "a.json")
        assert files.load(tmp_path / "a.json") == seq
        mono = small.shares["A1"]
        files.save(mono, tmp_path / "m.json")
        assert files.load(tmp_path / "m.json") == mono

    def test_message_roundtrips(self, tmp_path, airplane):
        challenge, state = make_challenge(
            airplane.pub, mode="sequence", merge="sum", slot_count=7,
            rng=random.Random(0), force_m=2919)
        response = ResponseVector(session_id=challenge.session_id, values=(1, 2, 3))
        verdict = Verdict(session_id=challenge.session_id, accepted=True,
                          matching_slot=1, merged=())
        for obj, kind in [(challenge, "challenge"), (state, "verifier-state"),
                          (response, "response"), (verdict, "verdict")]:
            path = tmp_path / f"{kind}.json"
            files.save(obj, path)
            loaded = files.load(path, expect_kind=kind)
            assert loaded == obj

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"kind": "mystery"}')
        with pytest.raises(SchemaError) as err:
            files.load(path)
        assert err.value.field == "kind"

    def test_bad_field_named(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"kind": "ns-public", "n": 2, "p": 123, "v": ["1", "2"]}')
        with pytest.raises(SchemaError) as err:
            files.load(path)
        assert err.value.field == "p"

    def test_not_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("not json at all")
        with pytest.raises(SchemaError):
            files.load(path)

    def test_wrong_kind_rejected(self, tmp_path, airplane):
        files.save(airplane.pub, tmp_path / "pub.json")
        with pytest.raises(SchemaError):
            files.load(tmp_path / "pub.json", expect_kind="ns-private")


class TestCliExitCodes:
    def test_unknown_command(self):
        assert run_cli(["frobnicate"]) == 2

    def test_unknown_flag(self):
        assert run_cli(["keygen", "--wat", "7"]) == 2

    def test_schema_violation_is_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "ns-public", "n": 2, "p": "x", "v": []}')
        code = run_cli(["challenge", "--pub", str(bad),
                        "-o", str(tmp_path / "c.json"), "--state", str(tmp_path / "s.json")])
        assert code == 2

    def test_monotone_refuses_not(self, tmp_path, capsys):
        run_cli(["keygen", "--n", "8", "-o", str(tmp_path)])
        code = run_cli([
            "compile", "--policy", "A and not B", "--universe", "A,B",
            "--mode", "monotone", "--key", str(tmp_path / "priv.json"),
            "-o", str(tmp_path / "shares")])
        assert code == 1
        assert "monotone" in capsys.readouterr().err

    def test_help_is_zero(self):
        assert run_cli(["--help"]) == 0


class TestKeygenCli:
    def test_forced_key_matches_table(self, tmp_path):
        code = run_cli(["keygen", "--n", "12",
                        "--force-p", "7420738134871", "--force-s", "5642069",
                        "-o", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "pub.json").read_text())
        assert [int(x) for x in doc["v"]] == list(fixtures.AIRPLANE_V)

    def test_byte_identical_under_seed(self, tmp_path):
        for sub in ("one", "two"):
            code = run_cli(["keygen", "--n", "8", "--seed", "c0ffee",
                            "-o", str(tmp_path / sub)])
            assert code == 0
        assert (tmp_path / "one/pub.json").read_bytes() == (tmp_path / "two/pub.json").read_bytes()
        assert (tmp_path / "one/priv.json").read_bytes() == (tmp_path / "two/priv.json").read_bytes()

    def test_force_flags_must_pair(self, tmp_path):
        assert run_cli(["keygen", "--n", "8", "--force-p", "9700247",
                        "-o", str(tmp_path)]) == 2


@pytest.fixture
def pipeline(tmp_path):
    """keygen + compile the five-holder demo policy, sequence mode, packed."""
    keys = tmp_path / "keys"
    shares = tmp_path / "shares"
    assert run_cli(["keygen", "--n", "12",
                    "--force-p", "7420738134871", "--force-s", "5642069",
                    "-o", str(keys)]) == 0
    assert run_cli([
        "compile", "--policy", fixtures.AIRPLANE_POLICY,
        "--universe", "A,B,C,D,E", "--max-size", "3",
        "--mode", "sequence", "--pack",
        "--key", str(keys / "priv.json"), "-o", str(shares)]) == 0
    return tmp_path


def _challenge_session(root, slots, seed="0f"):
    assert run_cli(["challenge", "--pub", str(root / "keys/pub.json"),
                    "--mode", "sequence", "--slots", str(slots),
                    "--seed", seed, "--force-m", "2919",
                    "-o", str(root / "challenge.json"),
                    "--state", str(root / "state.json")]) == 0


def _slot_count(root):
    doc = json.loads((root / "shares/share_A.json").read_text())
    return len(doc["slots"])


class TestPipeline:
    def test_authorized_group_accepted(self, pipeline):
        root = pipeline
        _challenge_session(root, _slot_count(root))
        for holder in ("A", "C"):
            assert run_cli(["respond", "--share", str(root / f"shares/share_{holder}.json"),
                            "--challenge", str(root / "challenge.json"),
                            "-o", str(root / f"r_{holder}.json")]) == 0
        code = run_cli(["verify", "--state", str(root / "state.json"),
                        "--responses", str(root / "r_A.json"), str(root / "r_C.json")])
        assert code == 0

    def test_unauthorized_pair_rejected(self, pipeline):
        root = pipeline
        _challenge_session(root, _slot_count(root))
        for holder in ("C", "D"):
            assert run_cli(["respond", "--share", str(root / f"shares/share_{holder}.json"),
                            "--challenge", str(root / "challenge.json"),
                            "-o", str(root / f"r_{holder}.json")]) == 0
        code = run_cli(["verify", "--state", str(root / "state.json"),
                        "--responses", str(root / "r_C.json"), str(root / "r_D.json")])
        assert code == 1

    def test_verify_json_output(self, pipeline, capsys):
        root = pipeline
        _challenge_session(root, _slot_count(root))
        for holder in ("A", "B"):
            run_cli(["respond", "--share", str(root / f"shares/share_{holder}.json"),
                     "--challenge", str(root / "challenge.json"),
                     "-o", str(root / f"r_{holder}.json")])
        capsys.readouterr()
        code = run_cli(["verify", "--state", str(root / "state.json"), "--json",
                        "--responses", str(root / "r_A.json"), str(root / "r_B.json")])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0 and doc["accepted"] is True

    def test_challenge_deterministic_under_seed(self, pipeline):
        root = pipeline
        slots = _slot_count(root)
        blobs = []
        for name in ("x", "y"):
            assert run_cli(["challenge", "--pub", str(root / "keys/pub.json"),
                            "--mode", "sequence", "--slots", str(slots),
                            "--seed", "deadbeef",
                            "-o", str(root / f"c_{name}.json"),
                            "--state", str(root / f"s_{name}.json")]) == 0
            blobs.append((root / f"c_{name}.json").read_bytes())
        assert blobs[0] == blobs[1]

    def test_audit_command_exact(self, pipeline, capsys):
        root = pipeline
        code = run_cli(["audit", "--key", str(root / "keys/priv.json"),
                        "--shares", str(root / "shares"),
                        "--policy", fixtures.AIRPLANE_POLICY,
                        "--universe", "A,B,C,D,E", "--max-size", "3",
                        "--force-m", "2919", "--json"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        assert doc["all_exact"] is True
        assert doc["false_accepts"] == [] and doc["missed"] == []
        assert len(doc["expected"]) == 16

    def test_session_mismatch_detected(self, pipeline):
        root = pipeline
        slots = _slot_count(root)
        _challenge_session(root, slots, seed="0f")
        run_cli(["respond", "--share", str(root / "shares/share_A.json"),
                 "--challenge", str(root / "challenge.json"),
                 "-o", str(root / "r_A.json")])
        # fresh session, stale response
        _challenge_session(root, slots, seed="1234")
        code = run_cli(["verify", "--state", str(root / "state.json"),
                        "--responses", str(root / "r_A.json")])
        assert code == 1


class TestMonotoneCliFlow:
    def test_monotone_compile_and_verify(self, tmp_path):
        keys = tmp_path / "keys"
        shares = tmp_path / "shares"
        assert run_cli(["keygen", "--n", "8",
                        "--force-p", "9700247", "--force-s", "5642069",
                        "-o", str(keys)]) == 0
        assert run_cli(["compile", "--policy", "(A1 and A2) or (A1 and A3)",
                        "--universe", "A1,A2,A3", "--mode", "monotone",
                        "--key", str(keys / "priv.json"), "-o", str(shares)]) == 0
        assert run_cli(["challenge", "--pub", str(keys / "pub.json"),
                        "--mode", "monotone", "--seed", "aa",
                        "--force-m", "202",
                        "-o", str(tmp_path / "c.json"),
                        "--state", str(tmp_path / "s.json")]) == 0
        for holder in ("A1", "A2"):
            assert run_cli(["respond", "--share", str(shares / f"share_{holder}.json"),
                            "--challenge", str(tmp_path / "c.json"),
                            "-o", str(tmp_path / f"r_{holder}.json")]) == 0
        assert run_cli(["verify", "--state", str(tmp_path / "s.json"),
                        "--responses", str(tmp_path / "r_A1.json"),
                        str(tmp_path / "r_A2.json")]) == 0
        # the pair that must not cooperate
        assert run_cli(["respond", "--share", str(shares / "share_A3.json"),
                        "--challenge", str(tmp_path / "c.json"),
                        "-o", str(tmp_path / "r_A3.json")]) == 0
        assert run_cli(["verify", "--state", str(tmp_path / "s.json"),
                        "--responses", str(tmp_path / "r_A2.json"),
                        str(tmp_path / "r_A3.json")]) == 1


class TestFileAccessBoundaries:
    def _record_opens(self, monkeypatch):
        opened = []
        real_open = builtins.open

        def spy(file, *args, **kwargs):
            opened.append(str(file))
            return real_open(file, *args, **kwargs)

        monkeypatch.setattr(builtins, "open", spy)
        return opened

    def test_respond_reads_only_its_own_share(self, pipeline, monkeypatch):
        root = pipeline
        _challenge_session(root, _slot_count(root))
        opened = self._record_opens(monkeypatch)
        assert run_cli(["respond", "--share", str(root / "shares/share_A.json"),
                        "--challenge", str(root / "challenge.json"),
                        "-o", str(root / "r_A.json")]) == 0
        reads = [p for p in opened if "share_" in p]
        assert reads and all(p.endswith("share_A.json") for p in reads)

    def test_verify_never_reads_private_key(self, pipeline, monkeypatch):
        root = pipeline
        _challenge_session(root, _slot_count(root))
        run_cli(["respond", "--share", str(root / "shares/share_A.json"),
                 "--challenge", str(root / "challenge.json"),
                 "-o", str(root / "r_A.json")])
        opened = self._record_opens(monkeypatch)
        run_cli(["verify", "--state", str(root / "state.json"),
                 "--responses", str(root / "r_A.json")])
        assert not any(p.endswith("priv.json") for p in opened)


class TestDemoCommand:
    @pytest.mark.parametrize("fixture", ["airplane", "small"])
    def test_demo_exits_zero(self, fixture, capsys):
        assert run_cli(["demo", "--fixture", fixture]) == 0
        out = capsys.readouterr().out
        assert "exact match" in out

    def test_airplane_demo_notes_row7(self, capsys):
        run_cli(["demo", "--fixture", "airplane"])
        out = capsys.readouterr().out
        assert "row 7" in out and "swaps B and C" in out

    def test_demo_json(self, capsys):
        assert run_cli(["demo", "--fixture", "airplane", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["audit_exact"] is True
