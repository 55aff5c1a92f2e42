// Placeholder entry point; experiment dispatch lands with the lab module.
int main() { return 0; }
