from udatalog.main import main

main()
