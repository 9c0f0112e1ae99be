"""
How the price simplex is cut up and turned into prices.

A point x of the simplex becomes a price vector. The three maps differ at
the boundary: the plain map R*x makes a vanished coordinate free, the
reciprocal map makes it infinitely expensive, and the compensable map puts
it at the bound T while keeping the total at R.
"""

from fractions import Fraction

from rental_harmony.mesh import (
    barycentric,
    cell_count,
    cells,
    grid_vertices,
    locate,
    price_map_compensable,
    price_map_reciprocal,
    price_map_su,
)


def fmt(prices):
    return "(" + ", ".join(str(p) for p in prices) + ")"


def main():
    m, k = 3, 2
    print(f"m={m}, k={k}: {len(grid_vertices(m, k))} grid points, {cell_count(m, k)} cells")
    for c in cells(m, k):
        print("  cell", c.vertices)

    T, R = Fraction(1000), Fraction(1000)
    print("\nprices at each grid point (T = R = 1000)")
    print(f"  {'y':<10}{'R*x':<22}{'1/x':<18}compensable")
    for y in grid_vertices(m, k):
        x = barycentric(y, k)
        print(f"  {str(y):<10}{fmt(price_map_su(x, R)):<22}{fmt(price_map_reciprocal(x)):<18}"
              f"{fmt(price_map_compensable(x, T, R))}")

    x = (Fraction(1, 2), Fraction(3, 10), Fraction(1, 5))
    for k in (4, 16, 64):
        c = locate(x, k)
        print(f"\nk={k}: point {fmt(x)} lies in the cell with base {c.base}, steps {c.perm}")


if __name__ == "__main__":
    main()
