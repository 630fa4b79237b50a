"""Compare the compiled minimum-DFS-code kernel with the pure-Python one.

    python benchmarks/bench_kernels.py --graphs 300 --repeat 3
"""

import argparse
import random
import statistics
import time

from collabanon._kernels import min_dfs_code_ext, min_dfs_code_py


def random_components(count, lo, hi, labels, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(lo, hi)
        adj = [set() for _ in range(n)]
        # random spanning tree plus a few chords keeps it connected
        for i in range(1, n):
            j = rng.randrange(i)
            adj[i].add(j)
            adj[j].add(i)
        for _ in range(n // 2):
            a, b = rng.sample(range(n), 2)
            adj[a].add(b)
            adj[b].add(a)
        out.append(([rng.randrange(labels) for _ in range(n)], [sorted(s) for s in adj]))
    return out


def timed(fn, graphs, repeat):
    runs = []
    for _ in range(repeat):
        t = time.perf_counter()
        codes = [fn(lab, adj)[0] for lab, adj in graphs]
        runs.append(time.perf_counter() - t)
    return statistics.median(runs), codes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=300)
    ap.add_argument("--min-vertices", type=int, default=8)
    ap.add_argument("--max-vertices", type=int, default=12)
    ap.add_argument("--labels", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    graphs = random_components(args.graphs, args.min_vertices, args.max_vertices, args.labels, args.seed)
    t_py, codes_py = timed(min_dfs_code_py, graphs, args.repeat)
    print(f"python  {t_py:8.3f} s")
    if min_dfs_code_ext is None:
        print("cython  (extension not built)")
        return
    t_ext, codes_ext = timed(min_dfs_code_ext, graphs, args.repeat)
    if codes_ext != codes_py:
        raise SystemExit("kernels disagree")
    print(f"cython  {t_ext:8.3f} s")
    print(f"speedup {t_py / t_ext:8.2f}x  ({args.graphs} components, codes identical)")


if __name__ == "__main__":
    main()
