namespace phys {

void applyForce(long body, double magnitude) {
    double scaled = magnitude * 1.02;
    double capped = scaled > 50.0 ? 50.0 : scaled;
    (void)body;
    (void)capped;
}

void applyForce(long body, double x, double y) {
    (void)body;
    (void)x;
    (void)y;
}

double drag(double velocity) {
    double area = 0.42;
    return velocity * velocity * -0.18 * area;
}

void integrate(long body, double dt) {
    (void)body;
    (void)dt;
}

} // namespace phys
