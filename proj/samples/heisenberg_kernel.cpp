// Heat kernel of the first Heisenberg group along a few rays, next to the
// Gaussian marginal it integrates to in sigma.
#include <cstdio>
#include <numbers>

#include "carnot/carnot.hpp"

int main() {
    using namespace carnot;
    const HeatSemigroup S(make_heisenberg(1));
    const auto e = GroupPoint::identity(2, 1);

    std::printf("%8s %8s %22s %10s\n", "|z|", "sigma", "p(e, g, 1)", "error");
    for (double r : {0.0, 0.5, 1.0, 2.0})
        for (double s : {0.0, 0.5, 2.0}) {
            GroupPoint g{Vec::Zero(2), Vec::Constant(1, s)};
            g.z[0] = r;
            const auto v = S.kernel()(e, g, 1.0);
            std::printf("%8.2f %8.2f %22.16g %10.2g\n", r, s, v.value, v.error);
        }

    Vec zp(2);
    zp << 1.0, 0.5;
    const auto m = vertical_marginal(S, e, zp, 1.0);
    std::printf("\nsigma-marginal at z' = (1, 0.5): deviation from (4 pi)^-1 exp(-|z'|^2/4) = %.2g\n", m.deviation);
    std::printf("total mass - 1 = %.2g\n", selftest_normalization(S).deviation);
}
