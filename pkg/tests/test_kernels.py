import random

import pytest

from retrobleu import _kernels
from retrobleu._kernels import pure
from retrobleu.benchgen import random_route
from retrobleu.errors import MissingTokenError
from retrobleu.ngramdb import key_of
from retrobleu.routes import TokenKind, count_ngrams, extract_ngrams, flatten_reactions

from .oracles import oracle_token_windows

BACKENDS = list(_kernels.available_backends().items())


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def backend(request):
    return request.param[1]


def test_compiled_backend_is_available():
    # the build produces the extension; the pure path stays importable
    assert "pure" in _kernels.available_backends()
    assert _kernels.BACKEND in _kernels.available_backends()


class TestCountChainWindows:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_enumeration(self, backend, n):
        rng = random.Random(n)
        for _ in range(50):
            route = random_route(rng, rng.randint(1, 9))
            _, child_off, child_idx = flatten_reactions(route)
            count = backend.count_chain_windows(child_off, child_idx, n)
            assert count == len(oracle_token_windows(route, n, TokenKind.TEMPLATE))

    def test_rejects_small_n(self, backend):
        with pytest.raises(ValueError):
            backend.count_chain_windows([0, 0], [], 1)

    def test_route_shorter_than_n(self, backend):
        assert backend.count_chain_windows([0, 0], [], 2) == 0


class TestCountRecordedWindows:
    def test_matches_extraction_and_membership(self, backend):
        rng = random.Random(42)
        for _ in range(100):
            route = random_route(rng, rng.randint(1, 9))
            n = rng.choice([2, 3])
            grams = extract_ngrams(route, n, TokenKind.TEMPLATE)
            entries = {key_of(g.tokens) for g in grams if rng.random() < 0.5}
            tokens, child_off, child_idx = flatten_reactions(route, TokenKind.TEMPLATE)
            recorded, total = backend.count_recorded_windows(
                tokens, child_off, child_idx, n, entries
            )
            assert total == len(grams)
            assert recorded == sum(key_of(g.tokens) in entries for g in grams)

    def test_missing_token_raises(self, backend):
        tokens = ["a", None]
        child_off = [0, 1, 1]
        child_idx = [1]
        with pytest.raises(MissingTokenError):
            backend.count_recorded_windows(tokens, child_off, child_idx, 2, set())

    def test_missing_token_outside_window_tolerated(self, backend):
        # two disconnected single reactions: no window ever forms
        tokens = ["a", None]
        child_off = [0, 0, 0]
        child_idx = []
        assert backend.count_recorded_windows(tokens, child_off, child_idx, 2, set()) == (0, 0)


class TestBackendAgreement:
    def test_backends_agree_everywhere(self):
        backends = _kernels.available_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        rng = random.Random(7)
        for _ in range(200):
            route = random_route(rng, rng.randint(1, 10))
            n = rng.choice([2, 3, 4])
            tokens, child_off, child_idx = flatten_reactions(route, TokenKind.TEMPLATE)
            grams = extract_ngrams(route, n, TokenKind.TEMPLATE)
            entries = {key_of(g.tokens) for g in grams if rng.random() < 0.4}
            results = {
                name: (
                    impl.count_chain_windows(child_off, child_idx, n),
                    impl.count_recorded_windows(tokens, child_off, child_idx, n, entries),
                )
                for name, impl in backends.items()
            }
            values = set(results.values())
            assert len(values) == 1, results

    def test_count_ngrams_uses_selected_backend(self):
        rng = random.Random(8)
        route = random_route(rng, 6)
        assert count_ngrams(route, 2) == len(extract_ngrams(route, 2, TokenKind.TEMPLATE))


class TestPureIteration:
    def test_window_indices_are_depth_first(self):
        # one root with two single-reaction branches
        child_off = [0, 2, 2, 2]
        child_idx = [1, 2]
        windows = list(pure.iter_window_indices(child_off, child_idx, 2))
        assert windows == [(0, 1), (0, 2)]
