#include "gale/lbfgs.hpp"

#include <deque>
#include <limits>

namespace gale
{

const char *toString(LbfgsStatus s)
{
    switch (s)
    {
    case LbfgsStatus::Converged:
        return "converged";
    case LbfgsStatus::Stalled:
        return "stalled";
    case LbfgsStatus::MaxIterations:
        return "max_iterations";
    case LbfgsStatus::LineSearchFailed:
        return "line_search_failed";
    }
    return "unknown";
}

namespace
{

struct Pair
{
    Eigen::VectorXd s, y;
    double rho;
};

Eigen::VectorXd twoLoop(const std::deque<Pair> &mem, const Eigen::VectorXd &g)
{
    Eigen::VectorXd q = -g;
    std::vector<double> alpha(mem.size());
    for (size_t i = mem.size(); i-- > 0;)
    {
        alpha[i] = mem[i].rho * mem[i].s.dot(q);
        q -= alpha[i] * mem[i].y;
    }
    if (!mem.empty())
    {
        const Pair &last = mem.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (size_t i = 0; i < mem.size(); ++i)
    {
        const double beta = mem[i].rho * mem[i].y.dot(q);
        q += (alpha[i] - beta) * mem[i].s;
    }
    return q;
}

} // namespace

LbfgsResult minimizeLbfgs(const ObjectiveFn &f, const Eigen::VectorXd &x0, const LbfgsParams &params)
{
    LbfgsResult res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g(x.size());
    double fx = f(x, g);
    ++res.evaluations;
    if (!std::isfinite(fx) || !g.allFinite())
    {
        throw InvalidInput("minimizeLbfgs: objective is not finite at the initial point");
    }
    res.x = x;
    res.value = fx;

    std::deque<Pair> mem;
    std::vector<double> history{fx};
    Eigen::VectorXd xt(x.size()), gt(x.size());

    for (int it = 0; it < params.maxIterations; ++it)
    {
        if (g.lpNorm<Eigen::Infinity>() / std::max(1.0, x.lpNorm<Eigen::Infinity>()) < params.gradTolerance)
        {
            res.status = LbfgsStatus::Converged;
            break;
        }
        Eigen::VectorXd d = twoLoop(mem, g);
        double dg = d.dot(g);
        if (!(dg < 0.0))
        {
            mem.clear();
            d = -g;
            dg = d.dot(g);
        }
        double step = mem.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        bool accepted = false;
        double ft = fx;
        for (int ls = 0; ls < params.maxLineSearch; ++ls)
        {
            xt = x + step * d;
            ft = f(xt, gt);
            ++res.evaluations;
            if (!std::isfinite(ft) || !gt.allFinite() || ft > fx + params.armijo * step * dg)
            {
                hi = step;
            }
            else if (gt.dot(d) < params.curvature * dg)
            {
                lo = step;
            }
            else
            {
                accepted = true;
                break;
            }
            step = std::isinf(hi) ? 2.0 * step : 0.5 * (lo + hi);
        }
        if (!accepted)
        {
            res.status = LbfgsStatus::LineSearchFailed;
            break;
        }

        Pair p{xt - x, gt - g, 0.0};
        const double sy = p.s.dot(p.y);
        if (sy > 1e-12 * p.y.squaredNorm() && sy > 0.0)
        {
            p.rho = 1.0 / sy;
            mem.push_back(std::move(p));
            if (static_cast<int>(mem.size()) > params.memory)
            {
                mem.pop_front();
            }
        }
        x = xt;
        g = gt;
        fx = ft;
        res.iterations = it + 1;
        res.x = x;
        res.value = fx;
        history.push_back(fx);
        const int n = static_cast<int>(history.size());
        if (n > params.past)
        {
            const double before = history[static_cast<size_t>(n - 1 - params.past)];
            if ((before - fx) / std::max(1.0, std::abs(fx)) < params.relativeDecrease)
            {
                res.status = LbfgsStatus::Stalled;
                break;
            }
        }
    }
    return res;
}

} // namespace gale
