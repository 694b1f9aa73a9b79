#include "gale/sim.hpp"

#include <cmath>

namespace gale::scenarios
{

Scenario benignStraight()
{
    Scenario s;
    s.name = "benign_straight";
    s.map.size = Vec3(12.0, 6.0, 3.0);
    s.start = Vec3(1.0, 3.0, 1.5);
    s.goal = Vec3(11.0, 3.0, 1.5);
    s.sim.timeout = 20.0;
    return s;
}

Scenario figureEight(double windSpeed)
{
    Scenario s;
    s.name = "figure_eight";
    s.task = TaskKind::Track;
    s.map.size = Vec3(10.0, 6.0, 3.0);
    s.figureEight.center = Vec3(5.0, 3.0, 1.5);
    s.start = s.figureEight.center;
    s.wind.kind = WindKind::Gusty;
    s.wind.mean = Vec3(0.0, windSpeed, 0.0);
    s.wind.variance = 1.0;
    s.sim.timeout = 30.0;
    return s;
}

Scenario headOn()
{
    Scenario s = benignStraight();
    s.name = "head_on";
    DynamicObstacle ob;
    ob.position = Vec3(13.5, 3.15, 1.5);
    ob.velocity = Vec3(-0.8, 0.0, 0.0);
    ob.radius = 0.3;
    s.obstacles.push_back(ob);
    return s;
}

Scenario corridor(double windSpeed)
{
    Scenario s;
    s.name = "corridor";
    s.map.size = Vec3(13.0, 8.0, 3.0);
    s.start = Vec3(1.0, 4.0, 1.5);
    s.goal = Vec3(11.0, 4.0, 1.5);
    // Wall on the downwind side of the straight route.
    s.map.boxes.push_back({Vec3(5.5, 4.6, 0.0), Vec3(10.0, 8.0, 3.0)});
    s.wind.kind = WindKind::Gusty;
    s.wind.mean = Vec3(0.0, windSpeed, 0.0);
    // Gust standard deviation 0.6 x mean speed, variance kept to 2 decimals.
    s.wind.variance = std::round(36.0 * windSpeed * windSpeed) / 100.0;
    s.wind.correlationTime = 0.05;
    // Thrust close to what hover in the mean wind needs, so gusts saturate it.
    s.quad.thrustMax = 16.8;
    s.nmpc.stateWeight(2) = 2000.0;
    s.nmpc.terminalWeight(2) = 2000.0;
    s.sim.timeout = 25.0;
    return s;
}

} // namespace gale::scenarios
