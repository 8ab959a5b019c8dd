int z = 0;
float f0 = 0;
