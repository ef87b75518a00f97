import random
from collections import Counter

import pytest

from metaprop.netbuild import build_cooccurrence, build_occurrence, normalize
from metaprop.records import Repository, UnknownResourceError, make_record
from metaprop.swarm import (
    NoOutgoingEdgesError,
    NotNormalizedError,
    Particle,
    PropagationConfig,
    RecommendationStore,
    choose_next,
    decay,
    derive_seed,
    init_particles,
    load_store,
    propagate,
    recommend_meta,
    save_store,
)


def geometric(delta, t):
    """(1 - delta)^t by repeated multiplication, mirroring per-tick decay."""
    e = 1.0
    for _ in range(t):
        e *= 1.0 - delta
    return e


class TestDecay:
    def test_figure_values(self):
        assert decay(1.0, 0.15) == 0.85
        assert decay(0.85, 0.15) == 0.85 * 0.85  # 0.7225 up to float rounding

    def test_zero_decay_identity(self):
        assert decay(0.37, 0.0) == 0.37

    def test_full_decay(self):
        assert decay(1.0, 1.0) == 0.0


class TestInitParticles:
    def test_three_node_network(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        particles = init_particles(net, chain_repo, seed=4)
        assert len(particles) == 3
        for p in particles:
            assert p.energy == 1.0
            assert p.current == p.home
            assert not p.frozen

    def test_payload_is_full_metadata(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        by_home = {p.home: p for p in init_particles(net, chain_repo)}
        assert by_home["A"].payload["key"] == {"x"}
        assert by_home["A"].payload["cite"] == {"B"}

    def test_empty_network(self):
        repo = Repository()
        net = normalize(build_occurrence(repo, "cite"))
        assert init_particles(net, repo) == []

    def test_unnormalized_network_rejected(self, chain_repo):
        net = build_occurrence(chain_repo, "cite")
        with pytest.raises(NotNormalizedError):
            init_particles(net, chain_repo)

    def test_node_missing_from_repository(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        with pytest.raises(UnknownResourceError):
            init_particles(net, Repository([make_record("A", {})]))


class TestChooseNext:
    def test_single_edge(self):
        rng = random.Random(0)
        assert choose_next((("b", 1.0),), rng) == "b"

    def test_empirical_frequencies(self):
        edges = (("a", 0.25), ("b", 0.75))
        rng = random.Random(123)
        counts = Counter(choose_next(edges, rng) for _ in range(100_000))
        assert abs(counts["a"] / 100_000 - 0.25) < 0.01
        assert abs(counts["b"] / 100_000 - 0.75) < 0.01

    def test_deterministic_sequence(self):
        edges = (("a", 0.5), ("b", 0.3), ("c", 0.2))
        seq1 = [choose_next(edges, random.Random(7)) for _ in range(1)]
        rng1, rng2 = random.Random(7), random.Random(7)
        seq1 = [choose_next(edges, rng1) for _ in range(200)]
        seq2 = [choose_next(edges, rng2) for _ in range(200)]
        assert seq1 == seq2

    def test_no_edges(self):
        with pytest.raises(NoOutgoingEdgesError):
            choose_next((), random.Random(0))


class TestRecommendMeta:
    def _particle(self, home, energy, payload):
        return Particle(home=home, current="n3", energy=energy, payload=payload)

    def test_figure_sequence_reinforcement(self):
        repo = Repository([make_record("n3", {})])
        store = RecommendationStore()
        p1 = self._particle("n1", 0.85, {"key": frozenset({"swarm", "algorithms"})})
        p2 = self._particle("n2", 0.85 * 0.85, {"key": frozenset({"swarm"})})
        recommend_meta("n3", p1, repo, store)
        recommend_meta("n3", p2, repo, store)
        entry = store.entry("n3", "key")
        assert entry["swarm"] == 0.85 + 0.85 * 0.85  # ~1.573
        assert entry["algorithms"] == 0.85

    def test_metadata_poor_guard(self):
        repo = Repository([make_record("n3", {"key": ["already"]})])
        store = RecommendationStore()
        recommend_meta("n3", self._particle("n1", 0.85, {"key": frozenset({"swarm"})}), repo, store)
        assert store.entry("n3", "key") == {}

    def test_empty_payload_property(self):
        repo = Repository([make_record("n3", {})])
        store = RecommendationStore()
        recommend_meta("n3", self._particle("n1", 0.85, {"key": frozenset()}), repo, store)
        assert len(store) == 0

    def test_node_metadata_never_mutated(self):
        repo = Repository([make_record("n3", {})])
        store = RecommendationStore()
        recommend_meta("n3", self._particle("n1", 0.85, {"key": frozenset({"swarm"})}), repo, store)
        assert repo.meta("n3", "key") == frozenset()


class TestPropagate:
    def test_two_node_dead_end(self):
        repo = Repository([make_record("A", {"cite": ["B"], "key": ["x"]}), make_record("B", {})])
        net = normalize(build_occurrence(repo, "cite"))
        result = propagate(net, repo, PropagationConfig(delta=0.15, max_steps=10, seed=0))
        assert result.store.entry("B", "key") == {"x": 0.85}
        assert result.frozen == 2  # B's particle at t=1, A's at t=2

    def test_chain_closed_form(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        result = propagate(net, chain_repo, PropagationConfig(seed=9))
        assert result.store.entry("B", "key") == {"x": geometric(0.15, 1)}
        assert result.store.entry("C", "key") == {"x": geometric(0.15, 2)}

    def test_full_decay_zero_energies(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        result = propagate(net, chain_repo, PropagationConfig(delta=1.0, seed=0))
        for _, values in result.store.entries():
            assert all(e == 0.0 for e in values.values())

    def test_deterministic_store(self):
        records = [
            make_record(f"r{i}", {"key": [f"k{i % 4}", "shared"], "jour": [f"j{i % 3}"]})
            for i in range(20)
        ]
        repo = Repository(records)
        net = normalize(build_cooccurrence(repo, "key"))
        cfg = PropagationConfig(seed=42)
        assert propagate(net, repo, cfg).store == propagate(net, repo, cfg).store

    def test_seed_changes_walks(self):
        records = [
            make_record(f"r{i}", {"key": ["shared"]} | ({"jour": [f"j{i}"]} if i % 2 else {}))
            for i in range(12)
        ]
        repo = Repository(records)
        net = normalize(build_cooccurrence(repo, "key"))
        a = propagate(net, repo, PropagationConfig(seed=1)).store
        b = propagate(net, repo, PropagationConfig(seed=2)).store
        assert a != b

    def test_home_node_exclusion(self):
        # complete symmetric 2-node graph: particles bounce back and forth and
        # keep passing their home; the home must never receive its own values
        repo = Repository(
            [make_record("a", {"key": ["shared"], "jour": ["ja"]}),
             make_record("b", {"key": ["shared"]})]
        )
        net = normalize(build_cooccurrence(repo, "key"))
        result = propagate(net, repo, PropagationConfig(seed=5, max_steps=20))
        assert "ja" not in result.store.entry("a", "jour")
        # b has no jour, so it accumulates a's journal over repeated visits
        assert result.store.entry("b", "jour")["ja"] > 0

    def test_metadata_poor_guard_holds_everywhere(self):
        repo = Repository(
            [make_record(f"r{i}", {"key": ["shared"], "jour": [f"j{i % 2}"]}) for i in range(10)]
        )
        net = normalize(build_cooccurrence(repo, "key"))
        result = propagate(net, repo, PropagationConfig(seed=3))
        for (node, mu), _ in result.store.entries():
            assert not repo.meta(node, mu)

    def test_termination_by_energy_floor(self, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        result = propagate(net, chain_repo, PropagationConfig(max_steps=1000, energy_floor=0.5, seed=0))
        assert result.ticks < 1000

    def test_unnormalized_rejected(self, chain_repo):
        with pytest.raises(NotNormalizedError):
            propagate(build_occurrence(chain_repo, "cite"), chain_repo, PropagationConfig())

    def test_total_store_energy_bound(self):
        repo = Repository(
            [make_record(f"r{i}", {"key": ["shared"], "jour": [f"j{i}"]}) for i in range(8)]
        )
        net = normalize(build_cooccurrence(repo, "key"))
        cfg = PropagationConfig(seed=17)
        result = propagate(net, repo, cfg)
        total = sum(e for _, vals in result.store.entries() for e in vals.values())
        # each particle deposits at most its per-tick energy, once per tick,
        # and it carries two payload values (one key + one jour)
        bound = 2 * sum(8 * geometric(cfg.delta, t) for t in range(1, result.ticks + 1))
        assert total <= bound + 1e-9


class TestStoreSerialization:
    def test_round_trip(self, tmp_path):
        store = RecommendationStore()
        store.add("C", "key", "x", 0.85 * 0.85)
        store.add("B", "key", "x", 0.85)
        path = tmp_path / "store.tsv"
        save_store(store, path)
        assert "C\tkey\tx\t0.7225" in path.read_text()
        loaded = load_store(path)
        assert loaded.entry("B", "key")["x"] == pytest.approx(0.85, abs=1e-12)

    def test_dump_deterministic(self, tmp_path, chain_repo):
        net = normalize(build_occurrence(chain_repo, "cite"))
        paths = []
        for name in ("a.tsv", "b.tsv"):
            result = propagate(net, chain_repo, PropagationConfig(seed=21))
            p = tmp_path / name
            save_store(result.store, p)
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]


def test_derive_seed_is_stable_and_spread():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, "a") != derive_seed(2, "a")
