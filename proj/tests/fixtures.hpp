#pragma once

#include <svcache/objective.hpp>

// Rate table close to the reference scenario's analytic values, fixed so the
// policy-level tests do not depend on position sampling.
inline svcache::ObjectiveContext reference_context(double theta = 0.01) {
    svcache::ObjectiveContext ctx;
    ctx.rates.r_m_bl = 62.62e6;
    ctx.rates.r_m_el = 47.25e6;
    ctx.rates.r_s_bl = {63.63e6, 68.45e6, 72.67e6, 76.57e6};
    ctx.rates.r_s_el = {28.09e6, 29.28e6, 30.43e6, 31.48e6};
    ctx.rates.r_s_bl_error.assign(4, 0.0);
    ctx.rates.r_s_el_error.assign(4, 0.0);
    ctx.profile = svcache::make_profile(ctx.content);
    ctx.theta = theta;
    return ctx;
}
