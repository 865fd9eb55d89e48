// Directed energy coverage of both tiers at a few thresholds, with a quick MC check.

#include <wpt/wpt.hpp>

#include <cstdio>

int main()
{
    using namespace wpt;
    const NetworkConfig cfg; // N=32, alpha 2.7, lambda_mu 0.002, lambda_mm 0.02

    mc::McOptions opt;
    opt.trials = 20000;
    opt.seed = 7;
    const auto sub6 = mc::mc_directed_power(cfg, mc::Tier::sub6, opt);
    const auto mm = mc::mc_directed_power(cfg, mc::Tier::mmwave, opt);

    std::printf("%8s %10s %10s %10s %10s\n", "P_th", "sub6", "sub6_mc", "mmwave", "mm_mc");
    for (double dbm : {-30.0, -25.0, -20.0, -15.0, -10.0}) {
        const double p = dbm_to_watts(dbm);
        std::printf("%8.1f %10.4f %10.4f %10.4f %10.4f\n", dbm, energy::directed_coverage_sub6(cfg, p).value,
                    sub6.ccdf(p).mean, energy::directed_coverage_mm(cfg, p).value, mm.ccdf(p).mean);
    }
    const auto assoc = energy::association_probabilities(cfg);
    std::printf("association: sub6 %.4f  mm LoS %.4f  mm NLoS %.5f\n", assoc.p_sub6, assoc.p_mm_los, assoc.p_mm_nlos);
}
