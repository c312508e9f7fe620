// Loads a scenario, prints the rate table, then compares the optimized
// caching schemes with the three baseline placements.
//
//   quickstart [scenario.cfg]

#include <cstdio>

#include <svcache/svcache.hpp>

int main(int argc, char** argv) {
    using namespace svcache;
    const Scenario scenario = argc > 1 ? load_scenario(argv[1]) : Scenario{};

    // Fewer position samples than the default keep this under a few seconds.
    analytic::RateTableSettings rates;
    rates.sampling.samples = 20000;
    const ObjectiveContext ctx = make_context(scenario, rates);

    std::printf("MBS rate at gamma_BL: %.2f Mbit/s\n", ctx.rates.r_m_bl / 1e6);
    for (int n = 1; n <= scenario.network.n1; ++n)
        std::printf("BL cluster, %d serving SBS: %.2f Mbit/s\n", n, ctx.rates.s_bl(n) / 1e6);
    for (int n = 1; n <= scenario.network.n2; ++n)
        std::printf("EL cluster, %d serving SBS: %.2f Mbit/s\n", n, ctx.rates.s_el(n) / 1e6);

    const auto scheme1 = optimize(ucp_policy(ctx.content), ctx);
    const auto scheme2 = optimize(ucp_policy(ctx.content, CachingMode::random), ctx);

    std::printf("\nenergy efficiency [kbit/J]\n");
    std::printf("  Scheme I  (fractional) %8.2f  after %zu iterations\n", scheme1.ee_exact / 1e3,
                scheme1.trace.rows.size());
    std::printf("  Scheme II (random)     %8.2f  after %zu iterations\n", scheme2.ee_exact / 1e3,
                scheme2.trace.rows.size());
    std::printf("  MPCP                   %8.2f\n", ee_exact(mpcp_policy(ctx.content), ctx) / 1e3);
    std::printf("  UCP                    %8.2f\n", ee_exact(ucp_policy(ctx.content), ctx) / 1e3);
    std::printf("  ICP (mean of 200)      %8.2f\n", icp_expected_ee(ctx, 200, 7).mean / 1e3);

    std::printf("\nScheme II cached fractions (file: q1 q2)\n");
    for (std::size_t f = 0; f < scheme2.policy.q1.size(); ++f)
        if (scheme2.policy.q1[f] > 0.0 || scheme2.policy.q2[f] > 0.0)
            std::printf("  %2zu: %.3f %.3f\n", f + 1, scheme2.policy.q1[f], scheme2.policy.q2[f]);
}
