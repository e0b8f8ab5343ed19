#include <gtest/gtest.h>

#include <bose_expand/model.hpp>
#include <bose_expand/terms.hpp>

using namespace bose_expand;

TEST(ModeSet, LexicographicOrderZeroAndNegation) {
    const ModeSet s = build_mode_set(1, 2);
    ASSERT_EQ(s.size(), 5u);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i][0], static_cast<int>(i) - 2);
    EXPECT_EQ(s.zero_index(), 2u);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[s.negation(i)], -s[i]);
}

TEST(ModeSet, TwoDimensionalFindRoundTrip) {
    const ModeSet s = build_mode_set(2, 1);
    ASSERT_EQ(s.size(), 9u);
    EXPECT_EQ(s.zero_index(), 4u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto j = s.find(s[i]);
        ASSERT_TRUE(j.has_value());
        EXPECT_EQ(*j, i);
        EXPECT_EQ(s[s.negation(i)], -s[i]);
    }
    EXPECT_FALSE(s.find({2, 0, 0}).has_value());
    EXPECT_FALSE(s.find({0, 0, 1}).has_value());
}

TEST(ModeSet, RejectsBadInputs) {
    EXPECT_THROW(build_mode_set(0, 1), ValidationError);
    EXPECT_THROW(build_mode_set(4, 1), ValidationError);
    EXPECT_THROW(build_mode_set(1, 0), ValidationError);
    EXPECT_THROW(build_mode_set(3, 4), CapacityError);
}

TEST(ModeSet, DeterministicConstruction) {
    const ModeSet a = build_mode_set(3, 2), b = build_mode_set(3, 2);
    EXPECT_EQ(a.modes(), b.modes());
}

TEST(PairPotential, FourierKinds) {
    EXPECT_DOUBLE_EQ(PairPotential::constant(1.5).fourier({3, 0, 0}, 1), 1.5);
    const auto t = PairPotential::table({{{0, 0, 0}, 2.0}, {{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5}});
    EXPECT_DOUBLE_EQ(t.fourier({1, 0, 0}, 1), 0.5);
    EXPECT_DOUBLE_EQ(t.fourier({2, 0, 0}, 1), 0.0);
    const auto g = PairPotential::gaussian(1.0, 0.2);
    EXPECT_NEAR(g.fourier({0, 0, 0}, 1), std::sqrt(2.0 * std::numbers::pi) * 0.2, 1e-14);
    EXPECT_LT(g.fourier({1, 0, 0}, 1), g.fourier({0, 0, 0}, 1));
    EXPECT_DOUBLE_EQ(PairPotential::constant(2.0).scaled(0.25).fourier({0, 0, 0}, 1), 0.5);
    EXPECT_TRUE(PairPotential::constant(0.0).vanishes());
    EXPECT_TRUE(PairPotential::constant(1.0).scaled(0.0).vanishes());
}

TEST(PairPotential, ValidationRejectsNegativeOddAndOutOfRange) {
    const ModeSet s = build_mode_set(1, 1);
    EXPECT_THROW(validate_potential(PairPotential::constant(-1.0), s), ValidationError);
    EXPECT_THROW(validate_potential(PairPotential::table({{{1, 0, 0}, 1.0}}), s), ValidationError);
    EXPECT_THROW(validate_potential(PairPotential::table({{{3, 0, 0}, 1.0}, {{-3, 0, 0}, 1.0}}), s), ValidationError);
    EXPECT_THROW(validate_potential(PairPotential::gaussian(1.0, 0.0), s), ValidationError);
    EXPECT_NO_THROW(validate_potential(PairPotential::table({{{2, 0, 0}, 1.0}, {{-2, 0, 0}, 1.0}}), s));
}

TEST(CutoffModel, BenchmarkAndCoupling) {
    const CutoffModel m = benchmark_model(10);
    EXPECT_EQ(m.modes.size(), 3u);
    EXPECT_DOUBLE_EQ(m.coupling(), 1.0 / 9.0);
    EXPECT_DOUBLE_EQ(m.vhat({0, 0, 0}), 1.0);
    EXPECT_THROW(m.with_particles(1), ValidationError);
}

TEST(TrapGrid, HarmonicValidatesAndTableChecksBoundary) {
    const TrapGrid g = TrapGrid::harmonic(1, 6.0, 101);
    EXPECT_NO_THROW(g.validate());
    EXPECT_DOUBLE_EQ(g.coordinate(0), -6.0);
    TrapGrid low = g;
    low.values.front() = 1.0;
    EXPECT_THROW(low.validate(), ValidationError);
    TrapGrid neg = g;
    neg.values[50] = -1.0;
    EXPECT_THROW(neg.validate(), ValidationError);
    TrapGrid shallow = TrapGrid::harmonic(1, 2.0, 101);
    EXPECT_THROW(shallow.validate(), ValidationError);
}

TEST(InteractionTerms, ConserveMomentumAndStayInside) {
    const CutoffModel m = benchmark_model(10, 2);
    const auto terms = interaction_terms(m);
    ASSERT_FALSE(terms.empty());
    for (const auto& t : terms) {
        EXPECT_EQ(m.modes[t.c1] + m.modes[t.c2], m.modes[t.a1] + m.modes[t.a2]);
        EXPECT_GT(t.amplitude, 0.0);
    }
}
