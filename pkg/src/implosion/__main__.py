from .cli_reports import main

main()
