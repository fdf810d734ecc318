# Utils package initialization file 