# MySQL deployments talk to the database through PyMySQL
import pymysql
pymysql.install_as_MySQLdb()
