#include <gtest/gtest.h>

#include <numeric>

#include <svcache/popularity.hpp>

using namespace svcache;

TEST(Popularity, ZipfHeadMatchesHarmonicNumber) {
    const auto p = zipf(20, 1.0);
    double h20 = 0.0;
    for (int n = 1; n <= 20; ++n) h20 += 1.0 / n;
    EXPECT_NEAR(p[0], 1.0 / h20, 1e-15);
    EXPECT_NEAR(p[0], 0.27795, 1e-5);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-14);
}

TEST(Popularity, ZeroSkewIsUniform) {
    for (double x : zipf(7, 0.0)) EXPECT_DOUBLE_EQ(x, 1.0 / 7.0);
}

TEST(Popularity, ProbabilitiesDecreaseWithRank) {
    for (double alpha : {0.2, 1.0, 2.5}) {
        const auto p = zipf(50, alpha);
        for (std::size_t i = 1; i < p.size(); ++i) EXPECT_LT(p[i], p[i - 1]);
    }
}

TEST(Popularity, QualityPreferenceEndpointsAndComplement) {
    EXPECT_DOUBLE_EQ(quality_preference(1, 20).g_hdv, 1.0);
    EXPECT_DOUBLE_EQ(quality_preference(20, 20).g_hdv, 0.0);
    for (int f = 1; f <= 20; ++f) {
        const auto q = quality_preference(f, 20);
        EXPECT_DOUBLE_EQ(q.g_sdv + q.g_hdv, 1.0);
    }
    EXPECT_NEAR(quality_preference(11, 21).g_sdv, 0.5, 1e-15);
}

TEST(Popularity, RejectsBadArguments) {
    EXPECT_THROW(zipf(0, 1.0), std::invalid_argument);
    EXPECT_THROW(zipf(5, -0.1), std::invalid_argument);
    EXPECT_THROW(quality_preference(0, 20), std::out_of_range);
    EXPECT_THROW(quality_preference(21, 20), std::out_of_range);
}

TEST(Popularity, ProfileFromContent) {
    ContentConfig c;
    const auto prof = make_profile(c);
    ASSERT_EQ(prof.p.size(), 20u);
    ASSERT_EQ(prof.g_hdv.size(), 20u);
    EXPECT_EQ(prof.p, zipf(20, 1.0));
}
