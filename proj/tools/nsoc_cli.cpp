// Placeholder main; the full CLI lands with the scenario layer.
int main() { return 0; }
