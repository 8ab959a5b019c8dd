double d = (double)42;
int narrow(double x) { return (int)x; }
