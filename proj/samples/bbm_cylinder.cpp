// (1 - 2s) times the nonlocal s-perimeter of the H^1 unit cylinder as s
// approaches 1/2, against (4 / sqrt pi) times its horizontal perimeter.
#include <cstdio>

#include "carnot/carnot.hpp"

int main() {
    using namespace carnot;
    const HeatSemigroup S(make_heisenberg(1));
    const auto E = region_from_name("cylinder:1,1", S.group());

    const auto per = horizontal_perimeter(S.group(), E);
    const auto curve = deficit_curve(S, E);
    std::printf("horizontal perimeter %.12f\n\n%10s %16s %16s\n", per.value, "t", "deficit", "ledoux");
    for (std::size_t i = 0; i < curve.size(); i += 4) std::printf("%10.3g %16.10f %16.10f\n", curve.t[i], curve.deficit[i], curve.ledoux(i));

    const auto r = bbm_limit(curve, {0.40, 0.44, 0.47, 0.49}, special::four_over_sqrt_pi * per.value);
    std::printf("\n%6s %16s %12s\n", "s", "(1-2s) P_s", "error");
    for (std::size_t i = 0; i < r.grid.size(); ++i) std::printf("%6.2f %16.10f %12.2g\n", r.grid[i], r.values[i], r.errors[i]);
    std::printf("\nextrapolated %.6f +- %.2g, target %.6f, deviation %.3g\n", r.limit, r.limit_error, r.target, r.deviation);
    std::printf("fit residual %.3g, propagated error %.3g\n", r.residual, r.propagated_error);
}
